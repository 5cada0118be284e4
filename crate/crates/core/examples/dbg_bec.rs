// debug scratch
fn main() {
    use becg_core::graphs::GraphSpec;
    use becg_core::structure::*;
    let sched = FiltrationSchedule::default();
    println!("ambient radius would be {}", sched.ambient_radius());
    let t0 = std::time::Instant::now();
    let result = bec_detect(
        &GraphSpec::Lattice { dim: 3 },
        1.0,
        1.0,
        &BecParams { schedule: sched, ..Default::default() },
    );
    println!("elapsed: {:?}", t0.elapsed());
    match result {
        Ok((report, _)) => {
            for t in &report.classification.filtration_trend {
                println!("r={:?} dim={} gap_half={:.3e} loc={:.5}",
                    t.declared_radius, t.dim, t.gap_to_half, t.localization_q);
            }
            println!("verdicts {:?} BEC {}", report.classification.verdicts, report.bec);
        }
        Err(e) => println!("ERR: {e}"),
    }
}
