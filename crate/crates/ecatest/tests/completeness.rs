use ecatest::rules::{builtin_meta, structured_configuration, trivial_rule, RuleMeta, META_RULES};
use ecatest::tester::{test, test_fallback, test_trivial, test_wide, Constants, Variant};
use ecatest::{evolve, random_configuration, Configuration, LazyEvolution, QueryOracle, RuleName};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: [f64; 6] = [0.1, 0.2, 0.3, 0.5, 0.7, 0.9];

fn tiny() -> Constants {
    // Small constants give dense, short-horizon grids with many flanks.
    Constants {
        b0: 1.0,
        b1: 0.5,
        b2: 3.0,
        b3: 1.0,
        b4: 4.0,
        b5: 4.0,
    }
}

// Half random, half long alternating stretches of final and non-final blocks.
fn initial(meta: &RuleMeta, n: usize, m: usize, trial: usize, rng: &mut ChaCha8Rng) -> Configuration {
    if trial % 2 == 0 {
        random_configuration(n, rng).unwrap()
    } else {
        let block = rng.gen_range(1..=m.max(2));
        structured_configuration(meta, n, block, rng).unwrap()
    }
}

#[test]
fn grid_tester_accepts_evolutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut grid_runs = 0;
    for trial in 0..3000 {
        let name = META_RULES[trial % META_RULES.len()];
        let meta = builtin_meta(name).unwrap();
        let n = rng.gen_range(8..400);
        let m = rng.gen_range(4..200);
        let eps = EPS[rng.gen_range(0..EPS.len())];
        let c = match trial % 3 {
            0 => Constants::LAB,
            1 => tiny(),
            _ => Constants::PAPER,
        };
        let init = initial(&meta, n, m, trial, &mut rng);
        let env = evolve(&init, meta.rule(), m).unwrap();
        let mut oracle = QueryOracle::new(&env);
        let v = test(&mut oracle, &meta, eps, &c, &mut rng).unwrap();
        assert!(v.accepted(), "{name} n={n} m={m} eps={eps} c={c:?} init={init} {v:?}");
        grid_runs += (v.variant == Variant::Grid) as usize;
    }
    assert!(grid_runs > 1000, "{grid_runs}");
}

#[test]
fn wide_tester_accepts_evolutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut wide_runs = 0;
    for trial in 0..300 {
        let name = META_RULES[trial % META_RULES.len()];
        let meta = builtin_meta(name).unwrap();
        let m = rng.gen_range(10..60);
        let eps = EPS[rng.gen_range(0..EPS.len())];
        let n = rng.gen_range(2000..20000);
        let init = initial(&meta, n, m, trial, &mut rng);
        let mut oracle = QueryOracle::new(LazyEvolution::new(init.clone(), meta.rule(), m).unwrap());
        let v = test_wide(&mut oracle, &meta, eps, &tiny(), &mut rng).unwrap();
        assert!(v.accepted(), "{name} n={n} m={m} eps={eps} init={init} {v:?}");
        wide_runs += (v.variant == Variant::Wide) as usize;
    }
    assert!(wide_runs > 100, "{wide_runs}");
}

#[test]
fn fallback_and_trivial_testers_accept_evolutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..400 {
        let n = rng.gen_range(7..100);
        let m = rng.gen_range(2..50);
        let eps = EPS[rng.gen_range(0..EPS.len())];
        let init = random_configuration(n, &mut rng).unwrap();
        let name = [RuleName::All1, RuleName::All0, RuleName::Nor, RuleName::Nand][trial % 4];
        let rule = trivial_rule(name).unwrap();
        let env = evolve(&init, rule.rule(), m).unwrap();
        let v = test_trivial(&mut QueryOracle::new(&env), rule, eps, &Constants::PAPER, &mut rng).unwrap();
        assert!(v.accepted(), "{name} n={n} m={m} {v:?}");
        let meta = builtin_meta(META_RULES[trial % 6]).unwrap();
        let env = evolve(&init, meta.rule(), m).unwrap();
        let v = test_fallback(&mut QueryOracle::new(&env), meta.rule(), eps, &Constants::PAPER, &mut rng).unwrap();
        assert!(v.accepted());
    }
}
