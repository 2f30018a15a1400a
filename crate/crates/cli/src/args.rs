//! Command-line surface: one subcommand per verified statement, shared
//! simulation flags, and validation of the parsed values into a runnable
//! experiment spec. Violated constraints (for example `a0 <= g`) are usage
//! errors, reported with exit code 2 like any other bad flag.

use clap::{Args, Parser, Subcommand, ValueEnum};
use gravbm::mc::{EnsembleConfig, HitDetection};
use gravbm::model::GravParams;

#[derive(Parser, Debug)]
#[command(
    name = "gravbm",
    version,
    about = "Simulate an inert particle with gravitation driven by reflected Brownian \
             motion, and verify its long-run laws against closed-form references",
    after_help = "Exit codes: 0 success, 1 runtime or threshold failure, 2 usage error."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify the stationary product law of (V, H): Gaussian velocity with
    /// mean -g and variance 1/2, independent exponential gap with rate 2g;
    /// reports KS distances, moments, and a binned 2-D histogram.
    Stationary(StationaryArgs),
    /// Verify the strong law X_t/t -> -g and S_t/t -> -g on a single path,
    /// with the exact drift-removed residual processes.
    StrongLaw(StrongLawArgs),
    /// Verify the fluctuation scales: running max of V grows like
    /// sqrt(log t), running max of the gap like (log t)/(2g).
    Fluctuations(FluctuationsArgs),
    /// Decompose paths into renewal cycles (returns to V = -g at contact
    /// after an excursion of |V+g| to a0) and fit the cycle-extreme tail
    /// rates: velocity tails decay like exp(-a^2), gap tails like exp(-2gr).
    Cycles(CyclesArgs),
    /// Verify the first-passage laws of drifted Brownian motion: hit
    /// probability exp(ma - |ma|) and the closed-form hitting-time density.
    Hitting(HittingArgs),
    /// Compare the noise-free simulation against the exact deterministic
    /// solution (exponential velocity relaxation to -g).
    ZeroNoise(ZeroNoiseArgs),
    /// Dump a raw simulated trajectory (t, x, s, v, l, b).
    Trace(TraceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    /// Output path, or "-" for standard output.
    #[arg(long, default_value = "-")]
    pub out: String,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Flags shared by the ensemble-driven experiments.
#[derive(Args, Debug)]
pub struct ConfigArgs {
    /// Gravitational acceleration (must be positive).
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// Integrator time step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Simulated duration per path.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Number of independent paths.
    #[arg(long)]
    pub paths: Option<usize>,
    /// Master seed; path i derives its stream from (seed, i).
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Time discarded before retaining samples [default: 100 * max(1/g, 1)].
    #[arg(long)]
    pub burn_in: Option<f64>,
    /// Time between retained samples.
    #[arg(long, default_value_t = 1.0)]
    pub stride: f64,
    /// Contact tolerance for renewal detection [default: 10 sqrt(dt)].
    #[arg(long)]
    pub gap_tol: Option<f64>,
    /// Renewal excursion threshold on |V + g|; must exceed g [default: g + 1].
    #[arg(long)]
    pub a0: Option<f64>,
}

impl ConfigArgs {
    /// Resolve into a validated ensemble configuration.
    pub fn build(&self, default_horizon: f64, default_paths: usize) -> Result<EnsembleConfig, String> {
        let params = GravParams::new(self.g).map_err(|e| e.to_string())?;
        let mut cfg = EnsembleConfig::new(
            params,
            self.dt,
            self.horizon.unwrap_or(default_horizon),
            self.paths.unwrap_or(default_paths),
            self.seed,
        );
        if let Some(b) = self.burn_in {
            cfg.burn_in = b;
        }
        cfg.sample_stride = self.stride;
        if let Some(t) = self.gap_tol {
            cfg.gap_tol = t;
        }
        if let Some(a0) = self.a0 {
            cfg.a0 = a0;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
pub struct StationaryArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Fail (exit 1) when either marginal KS distance exceeds this bound.
    #[arg(long)]
    pub max_ks: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct StrongLawArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct FluctuationsArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Comma-separated checkpoint times for the running-extreme medians.
    #[arg(long, default_value = "100,1000,10000", value_delimiter = ',')]
    pub checkpoints: Vec<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct CyclesArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct HittingArgs {
    /// Level to hit (nonzero).
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    /// Drift of the Brownian motion.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub m: f64,
    /// Integrator time step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Simulated duration per path.
    #[arg(long, default_value_t = 200.0)]
    pub horizon: f64,
    /// Number of independent paths.
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Crossing detector: grid endpoints only, or with the exact
    /// within-step Brownian-bridge correction.
    #[arg(long, value_enum, default_value_t = Detection::Bridge)]
    pub detection: Detection,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Detection {
    Grid,
    Bridge,
}

impl From<Detection> for HitDetection {
    fn from(d: Detection) -> Self {
        match d {
            Detection::Grid => HitDetection::Grid,
            Detection::Bridge => HitDetection::BrownianBridge,
        }
    }
}

#[derive(Args, Debug)]
pub struct ZeroNoiseArgs {
    /// Gravitational acceleration (must be positive).
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// Integrator time step.
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Comparison horizon.
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    /// Initial inert velocity.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub v0: f64,
    /// Initial gap between the particles.
    #[arg(long, default_value_t = 0.0)]
    pub h0: f64,
    /// Time between compared points.
    #[arg(long, default_value_t = 0.1)]
    pub stride: f64,
    /// Fail (exit 1) when max |V_sim - V_exact| exceeds this bound
    /// [default: 5 * dt].
    #[arg(long)]
    pub max_verr: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug)]
pub struct TraceArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parse an argument vector (excluding the binary name) into the CLI spec.
/// Errors render as clap usage errors with exit code 2.
pub fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    Cli::try_parse_from(std::iter::once(std::ffi::OsString::from("gravbm")).chain(
        argv.into_iter().map(|a| a.into()),
    ))
}
