// quick timing probe for the full witness at GL-32
fn main() {
    let t0 = std::time::Instant::now();
    let w = chernlab::obstruction::instability_witness(32).unwrap();
    let dt = t0.elapsed().as_secs_f64();
    println!("witness GL-32: integral {:.9} expected {:.9} doubled {:.9} control {:.2e} in {:.1}s",
        w.report.integral, w.expected, w.doubled_integral, w.control_integral, dt);
    println!("rel err {:.2e}, doubling rel {:.2e}",
        (w.report.integral - w.expected).abs()/w.expected,
        (w.doubled_integral - w.report.integral).abs()/w.report.integral.abs());
}
