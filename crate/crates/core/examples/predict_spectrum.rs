//! Lyapunov spectra from weights: the G2 root system, predictions for the
//! standard and adjoint representations, and the inverse map.
//!
//!     cargo run --example predict_spectrum [g1 g2 g3]

use g2_lyapunov::exact_linalg::{rat, Rational};
use g2_lyapunov::hodge_formulas::parse_rational;
use g2_lyapunov::root_g2::{
    angle, build_root_system, exterior_square_weight_multiset, multiset, multiset_sum, predict_spectrum,
    recover_lyapunov_vector, representation_weights, LyapunovVector, RepresentationName,
};

fn show(values: &[Rational]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let coords: Vec<Rational> = if args.len() == 3 {
        args.iter().map(|a| parse_rational(a)).collect::<Result<_, _>>()?
    } else {
        vec![rat(2), rat(1), rat(-3)]
    };

    let roots = build_root_system();
    let (a1, a2) = roots.simple;
    println!("{} roots, {} short, {} long", roots.roots.len(), roots.short_roots().len(), roots.long_roots().len());
    println!("simple roots {:?}, {:?}; angle = {:.4} pi", a1.coords(), a2.coords(), angle(&a1, &a2) / std::f64::consts::PI);

    let gamma = LyapunovVector::new([coords[0].clone(), coords[1].clone(), coords[2].clone()], rat(0))?;
    let std = representation_weights(RepresentationName::Standard);
    let adj = representation_weights(RepresentationName::Adjoint);
    let s = predict_spectrum(&std, &gamma);
    println!("gamma = ({})", show(gamma.coords()));
    println!("standard: ({})", show(s.values()));
    println!("adjoint:  ({})", show(predict_spectrum(&adj, &gamma).values()));

    let top = s.positive_part();
    let back = recover_lyapunov_vector(top[0].clone(), top[1].clone(), top[2].clone(), rat(0))?;
    println!("recovered from ({}): ({})", show(&top), show(back.coords()));

    let wedge = multiset(&exterior_square_weight_multiset(&std));
    println!(
        "wedge^2(standard) = adjoint + standard as weight multisets: {}",
        wedge == multiset_sum(&adj.multiset(), &std.multiset())
    );
    Ok(())
}
