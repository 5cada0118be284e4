// debug scratch
fn main() {
    use becg_core::graphs::*;
    use becg_core::spectral::*;
    let t0 = std::time::Instant::now();
    let report = transience_test(
        &GraphSpec::Lattice { dim: 3 },
        0,
        &TransienceParams { radii: vec![8, 12, 16, 20, 24], ..Default::default() },
    ).unwrap();
    println!("elapsed: {:?}", t0.elapsed());
    println!("norms: {:?}", report.norm_estimates);
    println!("norm_infinite: {} (true 6)", report.norm_infinite);
    for f in &report.fits {
        println!("r={} a={:.6} b={:.4} c={:.4} shift={:.5}", f.radius, f.a, f.b, f.c, f.edge_shift);
    }
    let watson = 0.25273100985866;
    println!("verdict {:?} cert {:?}", report.verdict, report.certificate);
    if let Some(v) = report.extrapolated_edge_value.as_finite() {
        println!("edge value {:.6} watson {:.6} rel err {:.3}%", v, watson, 100.0*(v-watson).abs()/watson);
    }
}
