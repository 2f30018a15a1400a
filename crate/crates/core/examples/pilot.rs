// Scratch pilot runs; not part of the deliverable surface.
use gravbm::mc::{
    collect_cycles, cycle_extreme_tails, hitting_time_oracle_test, stationary_marginal_test,
    EnsembleConfig, HitDetection, TailGrid,
};
use gravbm::model::GravParams;

fn main() {
    let which = std::env::args().nth(1).unwrap_or_default();
    match which.as_str() {
        "stationary" => stationary_pilot(),
        "cycles" => cycles_pilot(),
        "hitting" => hitting_pilot(),
        "fluct" => fluct_pilot(),
        _ => eprintln!("usage: pilot [stationary|cycles|hitting|fluct]"),
    }
}

fn stationary_pilot() {
    let t0 = std::time::Instant::now();
    let params = GravParams::new(1.0).unwrap();
    let mut cfg = EnsembleConfig::new(params, 1e-3, 10_000.0, 64, 20240817);
    cfg.burn_in = 100.0;
    cfg.sample_stride = 1.0;
    let r = stationary_marginal_test(&cfg).unwrap();
    println!(
        "g=1 dt=1e-3: n={} ks_v={:.5} ks_h={:.5} mean_v={:.5} var_v={:.5} mean_h={:.5} (se_v={:.5}, se_h={:.5})  [{:?}]",
        r.n_samples, r.ks_v, r.ks_h, r.mean_v, r.var_v, r.mean_h, r.se_mean_v, r.se_mean_h,
        t0.elapsed()
    );
}

fn cycles_pilot() {
    let t0 = std::time::Instant::now();
    let params = GravParams::new(1.0).unwrap();
    for a0 in [1.0001f64, 1.01, 1.05, 1.25] {
        let mut cfg = EnsembleConfig::new(params, 1e-3, 100_000.0, 4, 99);
        cfg.a0 = a0;
        let cycles = collect_cycles(&cfg, 0).unwrap();
        let total_t: f64 = cycles.iter().map(|c| c.duration).sum();
        let mean = total_t / cycles.len() as f64;
        println!(
            "a0={a0}: {} cycles over {total_t:.0} time units, mean duration {mean:.2}   [{:?}]",
            cycles.len(),
            t0.elapsed()
        );
        let grid = TailGrid {
            v_offsets: vec![2.0, 2.25, 2.5, 2.75, 3.0, 3.25, 3.5],
            gap_levels: vec![1.0, 1.5, 2.0, 2.5, 3.0],
        };
        if cycles.len() >= 1000 {
            let rep = cycle_extreme_tails(&cycles, &grid, &params).unwrap();
            for s in &rep.sup_v {
                println!("  sup_v >= -g+{}: {} ({:.2e})", s.level, s.exceedances, s.probability);
            }
            for s in &rep.sup_h {
                println!("  sup_h >= {}: {} ({:.2e})", s.level, s.exceedances, s.probability);
            }
            println!(
                "  slopes: up={:?} down={:?} gap={:?}",
                rep.sup_v_slope_vs_a2, rep.inf_v_slope_vs_a2, rep.sup_h_slope_vs_r
            );
        }
    }
}

fn fluct_pilot() {
    let t0 = std::time::Instant::now();
    let params = GravParams::new(1.0).unwrap();
    for seed in [1u64, 2, 3] {
        let cfg = EnsembleConfig::new(params, 1e-3, 10_000.0, 64, seed);
        let r = gravbm::mc::fluctuation_scaling(&cfg, &[100.0, 1000.0, 10_000.0]).unwrap();
        println!(
            "seed={seed}: med_max_v={:?} med_max_h={:?} v_slope={:.4} h_slope={:.4}  [{:?}]",
            r.median_max_v, r.median_max_h, r.v_slope_vs_sqrt_log_t, r.h_slope_vs_log_t,
            t0.elapsed()
        );
    }
}

fn hitting_pilot() {
    let t0 = std::time::Instant::now();
    let r = hitting_time_oracle_test(
        1.0,
        -1.0,
        1e-3,
        200.0,
        100_000,
        20240817,
        HitDetection::BrownianBridge,
    )
    .unwrap();
    println!(
        "bridge: frac={:.6} oracle={:.6} |diff|={:.6} chi2={:.2} dof={} crit={:.2}  [{:?}]",
        r.hit_fraction,
        r.oracle_prob_horizon,
        (r.hit_fraction - r.oracle_prob_horizon).abs(),
        r.chi_square,
        r.chi_square_dof,
        r.chi_square_crit_1pct,
        t0.elapsed()
    );
    let g = hitting_time_oracle_test(
        1.0,
        -1.0,
        1e-3,
        200.0,
        100_000,
        20240817,
        HitDetection::Grid,
    )
    .unwrap();
    println!(
        "grid:   frac={:.6} oracle={:.6} diff={:+.6}  [{:?}]",
        g.hit_fraction,
        g.oracle_prob_horizon,
        g.hit_fraction - g.oracle_prob_horizon,
        t0.elapsed()
    );
}
