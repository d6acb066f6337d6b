use proptest::prelude::*;
use tau_blocks::fnsr_oracle::*;
use tau_blocks::kernel::{HalfInt, Scalar};
use tau_blocks::nsr::Mode;

fn random_state(picks: &[(usize, i64)]) -> FockState {
    let pool: Vec<FockMonomial> = (0..=6).flat_map(|t| fock_monomials(HalfInt::from_twice(t))).collect();
    let mut v = FockState::new();
    for &(i, c) in picks {
        v.add_term(pool[i % pool.len()].clone(), Scalar::int(c));
    }
    v
}

fn coupling() -> impl Strategy<Value = Scalar> {
    (2i64..6, 1i64..4).prop_filter("b^2 != 1", |(n, d)| n != d).prop_map(|(n, d)| Scalar::frac(n, d))
}

fn momentum() -> impl Strategy<Value = Scalar> {
    (-9i64..10, 1i64..8).prop_map(|(n, d)| Scalar::frac(n, d))
}

fn sign() -> impl Strategy<Value = FieldSign> {
    prop_oneof![Just(FieldSign::Upper), Just(FieldSign::Lower)]
}

fn picks() -> impl Strategy<Value = Vec<(usize, i64)>> {
    prop::collection::vec((0usize..200, -5i64..6), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn fnsr_relations_replay(b in coupling(), p in momentum(), sg in sign(), pk in picks()) {
        let field = FreeField::new(&b, &p, sg).unwrap();
        let rep = replay_fnsr_relations(&field, &random_state(&pk), 2).unwrap();
        prop_assert!(rep.pass(), "{:?}", rep.failures);
    }

    #[test]
    fn vir12_relations_replay(b in coupling(), p in momentum(), sg in sign(), pk in picks()) {
        let field = FreeField::new(&b, &p, sg).unwrap();
        let rep = replay_vir12_relations(&field, &random_state(&pk), 2).unwrap();
        prop_assert!(rep.pass(), "{:?}", rep.failures);
    }

    #[test]
    fn b_swap_exchanges_copies(b in coupling(), p in momentum(), pk in picks()) {
        let field = FreeField::new(&b, &p, FieldSign::Upper).unwrap();
        let rep = replay_b_swap(&field, &random_state(&pk), 2).unwrap();
        prop_assert!(rep.pass(), "{:?}", rep.failures);
    }
}

#[test]
fn monomial_counts() {
    // prod_r (1 + x^{2r})^2 prod_n (1 - x^{2n})^{-1} in x = q^{1/2}.
    const N: usize = 11;
    let mul = |a: &[u64], b: &[u64]| -> Vec<u64> {
        let mut c = vec![0; N];
        for i in 0..N {
            for j in 0..N - i {
                c[i + j] += a[i] * b[j];
            }
        }
        c
    };
    let mut gf = vec![0u64; N];
    gf[0] = 1;
    for t in (1..N).step_by(2) {
        let mut f = vec![0u64; N];
        f[0] = 1;
        f[t] = 1;
        gf = mul(&mul(&gf, &f), &f);
    }
    for n in (2..N).step_by(2) {
        let g: Vec<u64> = (0..N).map(|k| u64::from(k % n == 0)).collect();
        gf = mul(&gf, &g);
    }
    let counts: Vec<u64> = (0..N).map(|t| fock_monomials(HalfInt::from_twice(t as i32)).len() as u64).collect();
    assert_eq!(counts, gf);
}

#[test]
fn central_charges_add_up() {
    for b in [Scalar::int(2), Scalar::frac(3, 2), Scalar::frac(1, 3)] {
        let field = FreeField::new(&b, &Scalar::frac(1, 5), FieldSign::Upper).unwrap();
        let (c1, c2) = field.vir12_central_charges().unwrap();
        assert_eq!(&c1 + &c2, field.central_charge() + Scalar::frac(1, 2));
    }
}

#[test]
fn anticommutator_on_psi_state() {
    let field = FreeField::new(&Scalar::int(2), &Scalar::frac(1, 3), FieldSign::Upper).unwrap();
    let v = field.psi(-HalfInt::HALF, &FreeField::vacuum());
    let h = HalfInt::HALF;
    let lhs = field.bracket(Generator::Nsr(Mode::G(h)), Generator::Nsr(Mode::G(-h)), &v).unwrap();
    assert_eq!(lhs, field.nsr(Mode::L(0), &v).scale(&Scalar::int(2)));
}
