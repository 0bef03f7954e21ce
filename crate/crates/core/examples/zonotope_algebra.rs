//! Affine forms over shared error symbols: exact products, then a linear
//! over-approximation.

use zonoridge::zonotope::{linearize, mul_forms, PolyForm, Registry, ZVector};

fn main() -> zonoridge::Result<()> {
    let reg = Registry::new();
    let (e1, e2) = (reg.data_symbol(), reg.data_symbol());

    // x = 2 + e1, y = 1 + 0.5 e1 - e2
    let x = PolyForm::affine(reg.tag(), 2.0, e1, 1.0);
    let y = PolyForm::affine(reg.tag(), 1.0, e1, 0.5).checked_add(&PolyForm::affine(reg.tag(), 0.0, e2, -1.0))?;

    let xy = mul_forms(&x, &y)?;
    println!("x * y has degree {} and {} terms", xy.degree(), xy.num_terms());
    println!("x * y lies within {:?}", xy.magnitude_interval());

    let lin = linearize(&ZVector::new(vec![xy.clone(), x.checked_mul(&x)?]), &reg)?;
    for (i, f) in lin.iter().enumerate() {
        println!(
            "linearized entry {i}: center {:.3}, interval {:?}",
            f.center(),
            f.interval()
        );
    }

    // Sample corners: the linear form must contain the exact product.
    for (a, b) in [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)] {
        let e = [(e1, a), (e2, b)]
            .into_iter()
            .collect::<std::collections::BTreeMap<_, _>>();
        let exact = xy.evaluate(&e);
        assert!(lin.entries()[0].interval().contains(exact));
        println!("e = ({a:+}, {b:+}): x*y = {exact:.3}");
    }
    Ok(())
}
