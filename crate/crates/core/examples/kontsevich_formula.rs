//! Sum formulas: the weight-1 formula, the conjectured higher-weight
//! branches, and a calibrated comparison against an sl2 estimate.
//!
//!     cargo run --release --example kontsevich_formula

use g2_lyapunov::cocycle_engine::{estimate_exponents, WalkConfig};
use g2_lyapunov::exact_linalg::{rat, ratio};
use g2_lyapunov::hodge_formulas::{
    compare_prediction, conjecture_prediction, kontsevich_sum, spectrum_shape, ShapeInput, VhsProfile,
};
use g2_lyapunov::monodromy_dataset::{load_builtin, BuiltinDataset};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("g=0, #S=4, deg=1  -> {}", kontsevich_sum(0, 4, &rat(1))?);
    println!("g=1, #S=1, deg=3  -> {}", kontsevich_sum(1, 1, &rat(3))?);
    println!("g=0, #S=2         -> {}", kontsevich_sum(0, 2, &rat(1)).unwrap_err());

    let g2 = VhsProfile::new(2, vec![2, 3, 2], 0, 4)?;
    let shape = spectrum_shape(g2.rank(), ShapeInput::Signature(4, 3))?;
    println!("G2 profile: rank {}, dim F^1 = {}, shape {}", g2.rank(), g2.filtration_dim(1), shape.pattern());
    for k in 1..=3 {
        let p = conjecture_prediction(&g2, k)?;
        let sum = p.predicted_sum.map_or("-".to_string(), |s| s.to_string());
        println!("  k={k}: {:?}, top {} exponents sum to {sum}", p.branch, p.k_used);
    }
    let cy3 = VhsProfile::new(3, vec![1, 1, 1, 1], 0, 3)?.with_degree("H^{3,0}", ratio(1, 6));
    let p = conjecture_prediction(&cy3, 1)?;
    println!("weight 3, h = (1,1,1,1), deg H^(3,0) = 1/6: lambda_1 = {}", p.predicted_sum.unwrap());

    // Walk time is not geodesic time: the scale is fixed on one run and
    // tested on an independent one.
    let sl2 = load_builtin(BuiltinDataset::Sl2Sanity)?;
    let run = |seed| estimate_exponents(&sl2, &WalkConfig { steps: 200_000, master_seed: seed, ..WalkConfig::default() });
    let calibration = run(7)?;
    let estimate = run(8)?;
    let weight_one = VhsProfile::new(1, vec![1, 1], 0, 3)?.with_degree("H^{1,0}", ratio(1, 2));
    let prediction = conjecture_prediction(&weight_one, 1)?;
    for scale in [1.0 / calibration.exponents[0], 1.0] {
        let report = compare_prediction(&prediction, &estimate, scale, 3.0)?;
        println!(
            "scale {scale:.4}: {:.5} vs {} ({:.1} SE) -> {}",
            report.scaled_sum,
            report.predicted,
            report.defect_sigma,
            if report.consistent { "consistent" } else { "inconsistent" }
        );
    }
    Ok(())
}
