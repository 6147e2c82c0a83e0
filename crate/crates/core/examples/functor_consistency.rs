//! Coupled estimates for several functors of the G2 cocycle driven by one
//! word stream, each compared with the spectrum predicted from the identity.
//!
//!     cargo run --release --example functor_consistency [steps] [functor...]

use g2_lyapunov::cocycle_engine::{coupled_estimate, functor_consistency, WalkConfig};
use g2_lyapunov::monodromy_dataset::{load_builtin, BuiltinDataset};
use g2_lyapunov::rep_functors::FunctorSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let steps = args.next().map_or(Ok(200_000), |s| s.parse())?;
    let mut functors: Vec<FunctorSpec> = args.map(|s| s.parse()).collect::<Result<_, _>>()?;
    if functors.is_empty() {
        functors = vec![FunctorSpec::ExteriorPower(2), FunctorSpec::Dual, "sym:2".parse()?];
    }
    let gens = load_builtin(BuiltinDataset::G2EllipticSurface)?;
    let cfg = WalkConfig {
        steps,
        master_seed: 42,
        ..WalkConfig::default()
    };
    let results = coupled_estimate(&gens, &functors, &cfg)?;
    let identity = &results[0];
    for r in &results[1..] {
        let cmp = functor_consistency(identity, r, 3.0)?;
        println!("{} (dim {}): max |z| = {:.2} -> {}", r.functor, r.dim(), cmp.max_zscore, if cmp.passed { "consistent" } else { "INCONSISTENT" });
        for (k, (p, e)) in cmp.reference.iter().zip(&cmp.estimated).enumerate().take(6) {
            println!("  {:>2}: predicted {p:+.5}  estimated {e:+.5}  z {:+.2}", k + 1, cmp.zscores[k]);
        }
    }
    Ok(())
}
