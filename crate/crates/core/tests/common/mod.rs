#![allow(dead_code)]

use eulerian::taillab::{alpha, DiscreteProductSpace};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(n, RT(n))` for odd `n ≤ 37`, from the published table.
pub fn rt_table() -> Vec<(usize, BigInt)> {
    include_str!("../data/rt_table.txt")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut it = l.split_whitespace();
            let n = it.next().unwrap().parse().unwrap();
            let v = it.next().unwrap().parse().unwrap();
            (n, v)
        })
        .collect()
}

/// A random instance with `n ≤ 8`, alphabets of size 2 or 3, and
/// `α(f, m) < 1/200`, together with its `m ≤ 3`.
pub fn random_tail_instance(seed: u64) -> (DiscreteProductSpace, Vec<BigRational>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=8);
    let sizes: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
    let values = sizes.iter().map(|&k| (0..k as i64).map(|i| BigRational::from_integer(i.into())).collect()).collect();
    let weights = sizes
        .iter()
        .map(|&k| {
            let raw: Vec<i64> = (0..k).map(|_| rng.gen_range(1..=5)).collect();
            let tot: i64 = raw.iter().sum();
            raw.iter().map(|&r| BigRational::new(r.into(), tot.into())).collect()
        })
        .collect();
    let space = DiscreteProductSpace::new(values, weights).unwrap();
    let m = rng.gen_range(1..=3);
    let int = |v: i64| BigRational::from_integer(v.into());
    let f: Vec<BigRational> = match rng.gen_range(0..3) {
        // sparse quadratic plus linear part
        0 => {
            let mut lin = vec![0i64; n];
            let mut quad = Vec::new();
            for j in 0..n {
                if rng.gen_bool(0.5) {
                    lin[j] = rng.gen_range(-5..=5);
                }
                for k in j + 1..n {
                    if rng.gen_bool(0.4) {
                        quad.push((j, k, rng.gen_range(-5..=5i64)));
                    }
                }
            }
            space.tabulate(|x| {
                let mut t = BigRational::zero();
                for j in 0..n {
                    t += &x[j] * int(lin[j]);
                }
                for &(j, k, c) in &quad {
                    t += &x[j] * &x[k] * int(c);
                }
                t
            })
        }
        // sparse cubic
        1 => {
            let mut terms = Vec::new();
            for _ in 0..rng.gen_range(1..=2 * n) {
                let j = rng.gen_range(0..n);
                let k = rng.gen_range(0..n);
                let l = rng.gen_range(0..n);
                terms.push((j, k, l, rng.gen_range(-4..=4i64)));
            }
            space.tabulate(|x| terms.iter().map(|&(j, k, l, c)| &x[j] * &x[k] * &x[l] * int(c)).sum())
        }
        // dense random table
        _ => (0..space.size()).map(|_| int(rng.gen_range(-10..=10))).collect(),
    };
    let a0 = alpha(&space, &f, m).unwrap();
    if a0.is_zero() {
        return (space, f, m);
    }
    // scale so that α = t/200 with t in [1/2, 99/100]
    let t = BigRational::new(rng.gen_range(50..=99i64).into(), 100.into());
    let c = t / (a0 * int(200));
    let f = f.into_iter().map(|v| v * &c).collect();
    (space, f, m)
}
