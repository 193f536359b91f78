//! The Q recursion against a symbolic expansion, plus property tests.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use proptest::prelude::*;

use stype_core::geometry::EndoList;
use stype_core::jets::{jet_arith, Expr, Jet};
use stype_core::linalg::{binomial, max_abs, standard_symplectic};
use stype_core::qrecursion::{index_tuples, q_coefficient, q_table, q_table_closed, symplectic_adjoint};

type Word = Vec<usize>;

/// Expands the recursion over non-commuting letters `E_l`.
fn symbolic_q(r_max: usize) -> Vec<BTreeMap<Word, u64>> {
    let mut q: Vec<BTreeMap<Word, u64>> = vec![BTreeMap::new(), BTreeMap::new()];
    for r in 2..=r_max {
        let mut m: BTreeMap<Word, u64> = BTreeMap::new();
        *m.entry(vec![r - 2]).or_default() += (r - 1) as u64;
        for qq in 2..=r.saturating_sub(2) {
            let c = binomial(r - 1, qq + 1);
            for (word, coef) in &q[qq] {
                let mut w = vec![r - 2 - qq];
                w.extend(word);
                *m.entry(w).or_default() += c * coef;
            }
        }
        q.push(m);
    }
    q
}

#[test]
fn closed_form_coefficients_match_symbolic_recursion() {
    let sym = symbolic_q(12);
    for r in 2..=12 {
        let tuples = index_tuples(r);
        assert_eq!(tuples.len(), sym[r].len(), "r = {r}");
        for t in tuples {
            assert_eq!(q_coefficient(r, &t).unwrap(), sym[r][&t], "r = {r}, {t:?}");
        }
    }
}

#[test]
fn sixth_order_coefficients() {
    let sym = symbolic_q(6);
    let expect: BTreeMap<Word, u64> = [
        (vec![4], 5),
        (vec![2, 0], 10),
        (vec![0, 2], 3),
        (vec![1, 1], 10),
        (vec![0, 0, 0], 1),
    ]
    .into_iter()
    .collect();
    assert_eq!(sym[6], expect);
}

fn matrix(d: usize, values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_row_slice(d, d, &values[..d * d])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn recursion_equals_closed_form(n in 1usize..=3, values in prop::collection::vec(-1.0f64..1.0, 8 * 36)) {
        let d = 2 * n;
        let entries: Vec<DMatrix<f64>> = (0..8).map(|l| matrix(d, &values[l * 36..])).collect();
        let endos = EndoList::from_entries(entries, standard_symplectic(n));
        let a = q_table(&endos, 9).unwrap();
        let b = q_table_closed(&endos, 9).unwrap();
        for r in 2..=9 {
            let diff = max_abs(&(a.q(r) - b.q(r)));
            prop_assert!(diff <= 1e-12 * (1.0 + max_abs(a.q(r))));
        }
    }

    #[test]
    fn adjoint_is_an_involution(n in 1usize..=3, values in prop::collection::vec(-2.0f64..2.0, 36)) {
        let d = 2 * n;
        let w = standard_symplectic(n);
        let a = matrix(d, &values);
        let back = symplectic_adjoint(&symplectic_adjoint(&a, &w).unwrap(), &w).unwrap();
        prop_assert!(max_abs(&(back - &a)) < 1e-12);
    }

    #[test]
    fn jet_identities(x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let u = 1.0 + Expr::var(0) * Expr::var(0) + 0.5 * Expr::var(1) * Expr::var(1);
        let a: Jet = jet_arith(&((Expr::var(0) + Expr::var(1)) * (Expr::var(0) - Expr::var(1))), &[x, y], 4).unwrap();
        let b: Jet = jet_arith(&(Expr::var(0) * Expr::var(0) - Expr::var(1) * Expr::var(1)), &[x, y], 4).unwrap();
        for (p, q) in a.coeffs().iter().zip(b.coeffs()) {
            prop_assert!((p - q).abs() < 1e-14);
        }
        let one: Jet = jet_arith(&(u.clone() / u.clone()), &[x, y], 5).unwrap();
        prop_assert!((one.value() - 1.0).abs() < 1e-14);
        prop_assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-12));
        let sq: Jet = jet_arith(&(u.clone().sqrt() * u.clone().sqrt() - u), &[x, y], 5).unwrap();
        prop_assert!(sq.max_abs() < 1e-12);
    }
}
