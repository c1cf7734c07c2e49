//! Drive the experiment runner from code, or from a TOML file given as the
//! first argument.

use std::path::PathBuf;

use rootflow::cli::{execute, ExperimentConfig, Mode, Side};

fn main() {
    let out = std::env::temp_dir().join("rootflow-example");
    let configs: Vec<ExperimentConfig> = match std::env::args().nth(1) {
        Some(path) => vec![ExperimentConfig::load(&PathBuf::from(path), std::env::vars()).expect("valid config")],
        None => {
            let mut exact = ExperimentConfig::new(Mode::Exact);
            exact.times = vec![0.0, 0.2, 0.4, 0.6, 0.8, 0.9, 0.95, 0.99];
            let mut compare = ExperimentConfig::new(Mode::Compare);
            compare.left = Some(Side::Poly);
            compare.right = Some(Side::Exact);
            compare.n = Some(400);
            compare.times = vec![0.25, 0.5];
            vec![exact, compare]
        }
    };
    for (i, cfg) in configs.iter().enumerate() {
        let dir = out.join(format!("run{i}"));
        match execute(cfg, &dir) {
            Ok(files) => files.iter().for_each(|f| println!("{}", f.display())),
            Err(e) => {
                eprintln!("{e}");
                std::process::exit(e.exit_code());
            }
        }
    }
}
