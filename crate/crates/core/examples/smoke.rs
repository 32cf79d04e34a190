use psm_core::model_io::{load_model, DEMO_1DOF, DEMO_4DOF};
use psm_core::validation::validate_model;

fn main() {
    for (name, text) in [("1dof", DEMO_1DOF), ("4dof", DEMO_4DOF)] {
        let model = load_model(text).unwrap();
        let t0 = std::time::Instant::now();
        match validate_model(&model, 42) {
            Ok(report) => {
                for c in &report.checks {
                    println!(
                        "{name} {:<40} mean={:.3e} max={:.3e} rel={:.3e}% thr={:.1e} {}",
                        c.name, c.mean_abs, c.max_abs, c.rel_pct, c.threshold,
                        if c.pass { "PASS" } else { "FAIL" }
                    );
                }
            }
            Err(e) => println!("{name} ERROR: {e}"),
        }
        println!("{name} took {:.2?}", t0.elapsed());
    }
}
