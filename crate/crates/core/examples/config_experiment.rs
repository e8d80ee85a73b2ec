//! Runs an experiment described in TOML, the same path the `pgsum --config`
//! binary takes, and writes its outputs to a temporary directory.

use periodogram_sums::cli::execute;
use periodogram_sums::parse_config;

const EXPERIMENT: &str = r#"
command = "mc"
n = 512
n_grid = [256, 512]
replications = 200
seed = 17
statistic = "std_q"

[model]
kind = "arfima"
d = 0.15
ma = [0.4]

[innovation]
family = "centered_exponential"

[weights]
kind = "cosine"
k = 3
"#;

fn main() -> periodogram_sums::Result<()> {
    let mut config = parse_config(EXPERIMENT)?;
    let dir = std::env::temp_dir().join("pgsum-config-example");
    config.output.dir = dir.clone();
    let report = execute(&config, None)?;
    println!("{report}");
    for entry in std::fs::read_dir(&dir)? {
        println!("wrote {}", entry?.path().display());
    }
    Ok(())
}
