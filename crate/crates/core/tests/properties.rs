use conelab::cone::{is_invariant, ConeRep, PolyhedralCone};
use conelab::cones2d::{decide_common_2x2, make_invariant_cone};
use conelab::linalg::enumerate_words;
use conelab::shared::common_lyapunov;
use conelab::simdiag::{decide_simdiag, SimDiagOptions};
use conelab::{Answer, SquareMatrix, ToleranceConfig};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;

fn tol() -> ToleranceConfig {
    ToleranceConfig::default()
}

fn mat2() -> impl Strategy<Value = SquareMatrix> {
    prop::array::uniform4(-3.0f64..3.0).prop_map(|e| SquareMatrix::new(DMatrix::from_row_slice(2, 2, &e)).unwrap())
}

fn family2() -> impl Strategy<Value = Vec<SquareMatrix>> {
    prop::collection::vec(mat2(), 1..5)
}

fn conj(a: &SquareMatrix, q: &DMatrix<f64>) -> SquareMatrix {
    SquareMatrix::new(q * a.as_matrix() * q.transpose()).unwrap()
}

fn rotation(t: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
}

fn answer(f: &[SquareMatrix]) -> Answer {
    decide_common_2x2(f, &tol()).unwrap().answer
}

/// Commuting diagonalizable family `S·D_j·S⁻¹`.
fn simdiag_family() -> impl Strategy<Value = Vec<SquareMatrix>> {
    (
        prop::collection::vec(-0.3f64..0.3, 9),
        prop::collection::vec(prop::collection::vec(-3.0f64..3.0, 3), 1..4),
    )
        .prop_map(|(p, ds)| {
            let s = DMatrix::identity(3, 3) + DMatrix::from_vec(3, 3, p);
            let inv = s.clone().try_inverse().unwrap();
            ds.iter()
                .map(|d| SquareMatrix::new(&s * DMatrix::from_diagonal(&DVector::from_vec(d.clone())) * &inv).unwrap())
                .collect()
        })
}

proptest! {
    #[test]
    fn answer_invariant_under_permutation(f in family2(), seed in any::<u64>()) {
        let mut g = f.clone();
        let k = g.len();
        g.rotate_left((seed as usize) % k);
        g.reverse();
        prop_assert_eq!(answer(&f), answer(&g));
    }

    #[test]
    fn answer_invariant_under_positive_scaling(f in family2(), exps in prop::collection::vec(-3i32..4, 4)) {
        let g: Vec<SquareMatrix> = f
            .iter()
            .zip(exps.iter().cycle())
            .map(|(a, &e)| SquareMatrix::new(a.as_matrix() * 2f64.powi(e)).unwrap())
            .collect();
        prop_assert_eq!(answer(&f), answer(&g));
    }

    #[test]
    fn answer_invariant_under_orthogonal_conjugation(f in family2(), t in 0.0f64..std::f64::consts::TAU, flip in any::<bool>()) {
        let mut q = rotation(t);
        if flip {
            q.row_mut(0).neg_mut();
        }
        let g: Vec<SquareMatrix> = f.iter().map(|a| conj(a, &q)).collect();
        prop_assert_eq!(answer(&f), answer(&g));
    }

    #[test]
    fn yes_witness_is_proper_and_invariant(f in family2()) {
        let d = decide_common_2x2(&f, &tol()).unwrap();
        if d.answer == Answer::Yes {
            let k = d.witness.expect("YES carries a witness");
            prop_assert!(k.is_proper(&tol()).proper);
            for a in &f {
                prop_assert!(is_invariant(&k, a, &tol()).unwrap().invariant);
            }
        }
    }

    #[test]
    fn subfamilies_of_yes_are_yes(f in family2(), mask in 1u32..16) {
        if answer(&f) == Answer::Yes {
            let sub: Vec<SquareMatrix> =
                f.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, a)| a.clone()).collect();
            if !sub.is_empty() {
                prop_assert_eq!(answer(&sub), Answer::Yes);
            }
        }
    }

    #[test]
    fn v_av_cone_is_invariant(
        l1 in 0.0f64..3.0,
        frac in 0.0f64..1.0,
        p in prop::array::uniform4(-2.0f64..2.0),
        v in prop::array::uniform2(-1.0f64..1.0),
    ) {
        let p = DMatrix::from_row_slice(2, 2, &p);
        prop_assume!(p.determinant().abs() > 0.1);
        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![l1, -frac * l1]));
        let a = SquareMatrix::new(&p * d * p.clone().try_inverse().unwrap()).unwrap();
        let v = DVector::from_row_slice(&v);
        prop_assume!(v.norm() > 1e-3);
        let c = make_invariant_cone(&a, &v, &tol()).unwrap();
        prop_assert!(is_invariant(&ConeRep::Polyhedral(c.cone), &a, &tol()).unwrap().invariant);
    }

    #[test]
    fn simdiag_answer_invariant_under_permutation(f in simdiag_family()) {
        let opts = SimDiagOptions::default();
        let a = decide_simdiag(&f, &tol(), &opts).unwrap();
        let mut g = f.clone();
        g.reverse();
        let b = decide_simdiag(&g, &tol(), &opts).unwrap();
        prop_assert_eq!(a.answer, b.answer);
        if a.answer == Answer::Yes {
            let k = a.witness.unwrap();
            let exact = f.iter().all(|m| is_invariant(&k, m, &tol()).unwrap().invariant);
            prop_assert!(exact || a.certificate.flags.iter().any(|f| f == "truncated-closure"));
        }
    }

    #[test]
    fn lyapunov_on_contractive_diagonal_blocks(ds in prop::collection::vec(prop::collection::vec(-0.95f64..0.95, 3), 1..5)) {
        let blocks: Vec<DMatrix<f64>> = ds.iter().map(|d| DMatrix::from_diagonal(&DVector::from_vec(d.clone()))).collect();
        let cert = common_lyapunov(&blocks, &tol(), None).unwrap();
        for b in &blocks {
            let r = &cert.v - b.transpose() * &cert.v * b;
            let lam = SymmetricEigen::new((&r + r.transpose()) * 0.5).eigenvalues.min();
            prop_assert!(lam >= -1e-9 * cert.v.norm());
        }
        prop_assert!(SymmetricEigen::new(cert.v.clone()).eigenvalues.min() > 0.0);
    }

    #[test]
    fn word_count_is_sum_of_powers(k in 1usize..4, len in 1usize..6) {
        let f: Vec<SquareMatrix> = (0..k).map(|i| SquareMatrix::diag(&[i as f64 + 1.0, 1.0])).collect();
        let n = enumerate_words(&f, len).unwrap().count();
        prop_assert_eq!(n, (1..=len as u32).map(|l| k.pow(l)).sum::<usize>());
    }

    #[test]
    fn cone_serde_round_trip(gens in prop::collection::vec(prop::array::uniform3(-5.0f64..5.0), 1..6)) {
        let g: Vec<DVector<f64>> = gens.iter().map(|x| DVector::from_row_slice(x)).collect();
        let k = ConeRep::Polyhedral(PolyhedralCone::new(3, g).unwrap());
        let back: ConeRep = serde_json::from_str(&serde_json::to_string(&k).unwrap()).unwrap();
        let (p, q) = (k.as_polyhedral().unwrap(), back.as_polyhedral().unwrap());
        prop_assert_eq!(p.generators.len(), q.generators.len());
        for (x, y) in p.generators.iter().zip(&q.generators) {
            prop_assert!((x - y).norm() <= 1e-14 * x.norm().max(1.0));
        }
    }

    #[test]
    fn matrix_serde_round_trip(a in mat2()) {
        let back: SquareMatrix = serde_json::from_str(&serde_json::to_string(&a).unwrap()).unwrap();
        prop_assert!((back.as_matrix() - a.as_matrix()).norm() <= 1e-14 * a.as_matrix().norm().max(1.0));
    }
}
