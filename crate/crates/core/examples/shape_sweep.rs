//! RBF shape error against the shape parameter at N = 24.

use membrane::experiments::{shape_param_sweep, StudyConfig, Model};
use membrane::shapes::Preset;

fn main() -> membrane::Result<()> {
    let eps: Vec<f64> = (1..=40).map(|i| 0.2 * i as f64).collect();
    for object in [Preset::Object1_2D, Preset::Object2_2D] {
        let mut cfg = StudyConfig::new(object, Model::Rbf);
        cfg.n_list = vec![24];
        let rows = shape_param_sweep(&cfg, &eps)?;
        let best = rows
            .iter()
            .filter_map(|r| r.max_error.map(|e| (r.epsilon, e)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("some fit succeeds");
        let refused = rows.iter().filter(|r| r.max_error.is_none()).count();
        println!("{}: best eps {:.1} (error {:.3e}), {refused} refused fits", object.name(), best.0, best.1);
    }
    Ok(())
}
