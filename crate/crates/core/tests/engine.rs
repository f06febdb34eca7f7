use mdtds::ball::{ball_enumerate, ball_size};
use mdtds::cesaro::cesaro_scan;
use mdtds::engine::{Action, Mdtds, PeriodicityVerdict};
use mdtds::family::Family;
use mdtds::scalar::{ratio, Rational, Scalar};
use mdtds::subgroup::SubgroupSpec;
use mdtds::word::{Letter, Word};
use mdtds::{Bank, Error};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_word(rng: &mut impl Rng, rank: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word::from_letters((0..len).map(|_| Letter::from_code(rng.gen_range(0..2 * rank))))
}

fn bank() -> Bank<Rational> {
    Bank::new(vec![ratio(2, 1), ratio(3, 1), ratio(5, 4)]).unwrap()
}

#[test]
fn cocycle_identity_under_both_actions() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let sign = Family::<Rational>::sign(3);
    for action in [Action::Right, Action::Left] {
        let system = Mdtds::new(bank()).with_action(action);
        let signs = Mdtds::new(&sign).with_action(action);
        for _ in 0..300 {
            let (a, b) = (random_word(&mut rng, 3, 6), random_word(&mut rng, 3, 6));
            let x = ratio(rng.gen_range(1..50), rng.gen_range(1..50));
            let (first, second) = match action {
                Action::Right => (&a, &b),
                Action::Left => (&b, &a),
            };
            let step = system.evaluate(first, &x).unwrap();
            assert_eq!(system.evaluate(&a.mul(&b), &x).unwrap(), system.evaluate(second, &step).unwrap());
            let y = ratio(rng.gen_range(-9..=9), 9);
            let step = signs.evaluate(first, &y).unwrap();
            assert_eq!(signs.evaluate(&a.mul(&b), &y).unwrap(), signs.evaluate(second, &step).unwrap());
        }
    }
}

#[test]
fn quarter_square_words_compose_in_order() {
    let system = Mdtds::new(Family::<f64>::quarter_square());
    let t = Word::parse("s1 s2", 2).unwrap();
    let right = system.evaluate(&t, &0.25).unwrap();
    assert!((right - 0.4375f64.powi(2)).abs() < 1e-12);
    let left = Mdtds::new(Family::<f64>::quarter_square()).with_action(Action::Left);
    assert!((left.evaluate(&t, &0.25).unwrap() - 0.296875).abs() < 1e-12);
}

#[test]
fn orbit_ball_covers_the_ball_once() {
    let system = Mdtds::new(bank());
    let orbit = system.orbit_ball(&ratio(1, 1), 4).unwrap();
    assert_eq!(orbit.len() as u64, ball_size(4, 3).to_u64().unwrap());
    let listed: Vec<Word> = ball_enumerate(4, 3).unwrap().map(|node| node.word).collect();
    for t in &listed {
        assert_eq!(orbit.get(t).unwrap(), &system.evaluate(t, &ratio(1, 1)).unwrap());
    }
}

#[test]
fn left_orbit_is_right_orbit_of_reversed_words() {
    let family = Family::<f64>::sign(2);
    let right = Mdtds::new(&family).orbit_ball(&0.5, 3).unwrap();
    let left = Mdtds::new(&family).with_action(Action::Left).orbit_ball(&0.5, 3).unwrap();
    for (t, v) in &left.values {
        assert_eq!(right.get(&t.reversed()).unwrap(), v);
    }
}

#[test]
fn node_cap_and_domain_errors() {
    let system = Mdtds::new(bank()).with_node_cap(100);
    assert!(matches!(system.orbit_ball(&ratio(1, 1), 3), Err(Error::NodeCap { .. })));
    let unbounded = Mdtds::new(bank());
    assert!(matches!(unbounded.evaluate(&Word::identity(), &ratio(-1, 2)), Err(Error::Domain { .. })));
    let quarter = Mdtds::new(Family::<Rational>::quarter_square());
    let err = quarter.evaluate(&Word::parse("s1^-2", 2).unwrap(), &ratio(0, 1)).unwrap_err();
    assert!(matches!(err, Error::Domain { .. } | Error::Map { .. }), "{err}");
}

#[test]
fn periodicity_implies_fixedness_on_small_subgroups() {
    let system = Mdtds::new(bank());
    for text in ["bal:", "cyclic:s1*s2^-1", "ker:1,2", "full"] {
        let spec = SubgroupSpec::parse(text, 3).unwrap();
        let x = ratio(7, 3);
        let periodic = system.is_h_periodic(&spec, &x, 2, 2).unwrap();
        let fixed = system.is_h_fixed(&spec, &x, 2).unwrap();
        if periodic.is_verified() {
            assert!(fixed.is_verified(), "{text}");
        }
        if let PeriodicityVerdict::Counterexample { lhs, rhs, .. } = &fixed {
            assert_ne!(lhs, rhs);
        }
    }
    let identity = Mdtds::new(Family::<Rational>::identity(3));
    let spec = SubgroupSpec::parse("full", 3).unwrap();
    assert!(identity.is_h_periodic(&spec, &ratio(1, 3), 2, 2).unwrap().is_verified());
}

#[test]
fn scan_agrees_with_orbit_ball_sums() {
    let family = Family::<Rational>::sign(2);
    let system = Mdtds::new(&family);
    let x = ratio(3, 5);
    let report = cesaro_scan(&system, &x, 5).unwrap();
    for row in &report.rows {
        let orbit = system.orbit_ball(&x, row.n).unwrap();
        let total = orbit.values.iter().fold(Rational::from_int(0), |s, (_, v)| s + v.clone());
        assert_eq!(row.ball_sum, total);
        assert_eq!(row.ball_size as usize, orbit.len());
        assert_eq!(row.mean, total / Rational::from_int(row.ball_size as i64));
    }
}

#[test]
fn float_and_exact_scans_agree() {
    let exact = Mdtds::new(bank());
    let float = Mdtds::new(Bank::new(vec![2.0, 3.0, 1.25]).unwrap());
    let a = cesaro_scan(&exact, &ratio(1, 1), 4).unwrap();
    let b = cesaro_scan(&float, &1.0, 4).unwrap();
    for (r, s) in a.rows.iter().zip(&b.rows) {
        let want = r.mean.approx_f64();
        assert!((want - s.mean).abs() <= 1e-9 * want.abs().max(1.0));
    }
}
