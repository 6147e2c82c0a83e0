//! Word streams and the renormalized product along a fixed word.
//!
//!     cargo run --release --example word_walks

use g2_lyapunov::cocycle_engine::{exponents_along_word, sample_word_stream, Cocycle, WalkConfig, WalkKind};
use g2_lyapunov::monodromy_dataset::{load_builtin, BuiltinDataset};
use g2_lyapunov::rep_functors::FunctorSpec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let gens = load_builtin(BuiltinDataset::G2EllipticSurface)?;
    for kind in [WalkKind::NonBacktracking, WalkKind::IidUniform] {
        let cfg = WalkConfig { walk_kind: kind, master_seed: 1, ..WalkConfig::default() };
        let word: Vec<_> = sample_word_stream(gens.generators.len(), &cfg)?.take(6).collect();
        println!("{kind:?}: {}", gens.format_word(&word));
    }

    let cfg = WalkConfig { master_seed: 1, ..WalkConfig::default() };
    let word: Vec<_> = sample_word_stream(gens.generators.len(), &cfg)?.take(101_000).collect();
    let cocycle = Cocycle::new(&gens, &FunctorSpec::Identity)?;
    for renorm in [1, 4, 16] {
        let ex = exponents_along_word(&cocycle, &word, 1000, renorm)?;
        let shown: Vec<String> = ex.iter().map(|x| format!("{x:+.4}")).collect();
        println!("renormalize every {renorm:>2}: ({})", shown.join(", "));
    }
    Ok(())
}
