use psm_core::model_io::{load_model, DEMO_1DOF};
use psm_core::simulate::{relative_energy_drift, simulate, IntegratorKind, SimulationConfig};

fn main() {
    let model = load_model(DEMO_1DOF).unwrap();
    for (step, dur) in [(2e-3, 5.0), (1e-3, 5.0), (1e-4, 5.0), (5e-5, 5.0)] {
        let config = SimulationConfig {
            integrator: IntegratorKind::Rk4,
            step,
            duration: dur,
            decimation: 1,
        };
        let t0 = std::time::Instant::now();
        match simulate(&model, &[1.25], &[0.0], |_| vec![0.0], &config) {
            Ok(samples) => {
                let drift = relative_energy_drift(&samples, &model);
                let xs: Vec<f64> = samples.iter().map(|s| s.x[0]).collect();
                let (lo, hi) = xs.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
                println!("h={step:.0e}: drift={drift:.4e} x_range=({lo:.3},{hi:.3}) [{:.2?}]", t0.elapsed());
            }
            Err(e) => println!("h={step:.0e}: {e}"),
        }
    }
    // semi-implicit Euler sanity
    let config = SimulationConfig {
        integrator: IntegratorKind::SemiImplicitEuler,
        step: 1e-4,
        duration: 5.0,
        decimation: 10,
    };
    let samples = simulate(&model, &[1.25], &[0.0], |_| vec![0.0], &config).unwrap();
    println!("semieuler h=1e-4: drift={:.4e}", relative_energy_drift(&samples, &model));
}
