//! The command-line pipelines driven from code: parse an argument vector,
//! run it, and inspect the JSON artifact.
//!
//!     cargo run --release --example run_pipeline

use g2_lyapunov::driver::{execute, parse_run_config};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::temp_dir().join("g2lyap-example");
    let out = out.to_str().ok_or("non-UTF-8 temp dir")?;
    let runs: [&[&str]; 4] = [
        &["verify", "--dataset", "g2-elliptic-surface"],
        &["predict", "--gamma", "2,1,-3", "--rep", "adjoint"],
        &["estimate", "--dataset", "sl2-sanity", "--steps", "100000", "--seed", "3"],
        &["formula", "--genus", "0", "--punctures", "4", "--degree", "1"],
    ];
    for args in runs {
        let mut argv = vec!["g2lyap"];
        argv.extend_from_slice(args);
        argv.extend_from_slice(&["--out", out]);
        let config = parse_run_config(argv)?;
        let outcome = execute(&config)?;
        print!("{}", outcome.summary);
        println!("  -> {} (exit {})", outcome.json_path.display(), outcome.exit_code);
    }
    Ok(())
}
