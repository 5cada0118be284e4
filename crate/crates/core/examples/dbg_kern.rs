// debug scratch
fn main() {
    use becg_core::graphs::*;
    use becg_core::spectral::*;
    use becg_core::linalg::cheby::*;
    let g = build_truncation(&GraphSpec::Lattice { dim: 3 }, 24).unwrap();
    println!("ball(24): {} vertices", g.len());
    let t0 = std::time::Instant::now();
    match ThermalKernel::new(&g, 6.0009, 1.0) {
        Ok(k) => {
            println!("kernel ok gap={:.4e} ({:?})", k.h_gap, t0.elapsed());
            let mut d0 = vec![0.0; g.len()]; d0[0] = 1.0;
            match k.heat_snapshots(&[0.7, 2.8, 11.2], &d0) {
                Ok(snaps) => println!("heat ok, {} snaps ({:?})", snaps.len(), t0.elapsed()),
                Err(e) => println!("HEAT ERR {e}"),
            }
            let v: Vec<f64> = (0..g.len()).map(|i| (i as f64*0.1).sin()).collect();
            match k.occupation_apply(&v) {
                Ok(_) => println!("occupation ok ({:?})", t0.elapsed()),
                Err(e) => println!("OCC ERR {e}"),
            }
        }
        Err(e) => println!("KERNEL ERR {e}"),
    }
    // direct coeff probes
    for dt in [0.4f64, 0.7, 2.1, 4.0] {
        let iv = SpectralInterval::new(0.0, 12.0);
        match chebyshev_coeffs(|h| (-dt*h).exp(), iv, 512, 1e-16) {
            Ok(c) => println!("e^(-{dt} h): deg {}", c.len()-1),
            Err(e) => println!("e^(-{dt} h) ERR: {e}"),
        }
    }
}
