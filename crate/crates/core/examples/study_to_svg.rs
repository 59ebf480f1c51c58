//! Configure a study from config text, run it and render the result as SVG.

use std::path::Path;

use membrane::config::{Command, ConfigFile, Settings};
use membrane::experiments::{convergence_study, write_convergence_csv, Quantity};
use membrane::plot::{figure_from_csv, render_svg, PlotOptions};

const CONFIG: &str = "
[study]
objects = object1-2d
models = fourier, rbf, pwl
n = 8:56:8
";

fn main() -> membrane::Result<()> {
    let file = ConfigFile::parse(CONFIG, Path::new("inline.conf"))?;
    let mut settings = Settings::new(Command::Study);
    settings.apply_section(file.section("study").expect("section present"))?;

    let mut rows = Vec::new();
    for cfg in settings.study_configs()? {
        rows.extend(convergence_study(&cfg)?.rows);
    }
    let mut csv = Vec::new();
    write_convergence_csv(&mut csv, &rows).expect("in memory");
    let csv = String::from_utf8(csv).expect("utf-8");

    let opts = PlotOptions {
        quantity: Quantity::Normal,
        ..Default::default()
    };
    let svg = render_svg(&figure_from_csv(&csv, &opts)?);
    let path = std::env::temp_dir().join("membrane-normals2d.svg");
    std::fs::write(&path, svg).map_err(|e| membrane::Error::InvalidArgument(e.to_string()))?;
    println!("wrote {}", path.display());
    Ok(())
}
