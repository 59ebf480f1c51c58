//! Shape, normal and force errors vs N for both 2D test objects, written as
//! CSV to stdout.

use membrane::experiments::{convergence_study, write_convergence_csv, Model, StudyConfig};
use membrane::shapes::Preset;

fn main() -> membrane::Result<()> {
    let mut rows = Vec::new();
    for object in [Preset::Object1_2D, Preset::Object2_2D] {
        for model in Model::ALL {
            rows.extend(convergence_study(&StudyConfig::new(object, model))?.rows);
        }
    }
    write_convergence_csv(&mut std::io::stdout(), &rows).expect("stdout");
    Ok(())
}
