// debug scratch
fn main() {
    use becg_core::graphs::*;
    use becg_core::spectral::*;
    let report = transience_test(
        &GraphSpec::RegularTree { degree: 3 },
        0,
        &TransienceParams { radii: vec![10, 12, 14, 16], ..Default::default() },
    ).unwrap();
    println!("norm_infinite: {} known: {:?}", report.norm_infinite, report.norm_known);
    for s in &report.green_samples {
        if s.radius == 16 {
            println!("eps={:.6} G={:.10}", s.lambda - report.norm_infinite, s.value);
        }
    }
    for f in &report.fits {
        println!("r={} a={:.6} c={:.4} shift={:.5}", f.radius, f.a, f.c, f.edge_shift);
    }
    println!("verdict {:?} edge {:?} cert {:?}", report.verdict, report.extrapolated_edge_value, report.certificate);
}
// appended: show edge value
