//! Time per step of each 2D model on the smooth test object.

use membrane::experiments::{timing_bench, write_timing_csv, Model, StudyConfig};
use membrane::shapes::Preset;

fn main() -> membrane::Result<()> {
    let mut rows = Vec::new();
    for model in Model::ALL {
        let mut cfg = StudyConfig::new(Preset::Object1_2D, model);
        cfg.n_list = vec![24, 56];
        rows.extend(timing_bench(&cfg, 200)?.rows);
    }
    write_timing_csv(&mut std::io::stdout(), &rows).expect("stdout");
    Ok(())
}
