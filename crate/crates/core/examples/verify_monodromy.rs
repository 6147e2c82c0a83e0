//! Exact certification of the G2 monodromy: invariant forms, signature,
//! invariant 3-form, and the short relations among the generators.
//!
//!     cargo run --release --example verify_monodromy [dataset]

use g2_lyapunov::monodromy_dataset::{load_dataset, verify_invariance};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "g2-elliptic-surface".into());
    let gens = load_dataset(&name)?;
    let report = verify_invariance(&gens)?;

    println!("{} (dim {}, sha256 {})", report.dataset, report.dim, report.checksum.as_deref().unwrap_or("-"));
    for g in &report.generators {
        println!(
            "  {:<18} det {}  unipotent index {:?}",
            g.label, g.determinant, g.unipotency_index
        );
    }
    println!("invariant symmetric forms: {}", report.symmetric_form_dimension);
    println!("invariant alternating forms: {}", report.alternating_form_dimension);
    if let Some(q) = &report.symmetric_form {
        println!("Q =");
        for row in q {
            println!("  [{}]", row.iter().map(|x| format!("{x:>3}")).collect::<Vec<_>>().join(" "));
        }
    }
    if let Some(sig) = report.signature {
        println!("signature (p,zero,n) = {sig}");
    }
    if let Some(phi) = &report.three_form {
        let terms: Vec<String> = phi.iter().map(|((i, j, k), c)| format!("{c}*e{i}{j}{k}")).collect();
        println!("phi = {}", terms.join(" + "));
    }
    println!("relations up to length {}:", report.relation_max_len);
    for r in report.relations.iter().take(8) {
        println!("  {} = {}I", r.word, if r.sign < 0 { "-" } else { "" });
    }
    for c in &report.checks {
        println!("[{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
    }
    if let Some(d) = &report.discrepancy {
        println!("discrepancy: {d:?}");
    }
    Ok(())
}
