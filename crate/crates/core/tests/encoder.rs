use belforge_core::encoder::{EncoderConfig, EncoderParams, featurize};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small(normalize: bool) -> EncoderConfig {
    EncoderConfig { n_min: 2, n_max: 3, buckets: 97, hidden: 7, dim: 5, normalize_output: normalize, lowercase: false }
}

fn random_params(rng: &mut ChaCha8Rng, cfg: EncoderConfig) -> EncoderParams {
    let mut p = EncoderParams::init(cfg, rng.random()).unwrap();
    for b in p.b1.iter_mut().chain(p.b2.iter_mut()) {
        *b = rng.random_range(-0.3..0.3);
    }
    p
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let alphabet: Vec<char> = "abcdeéklmnorstuz -".chars().collect();
    let n = rng.random_range(1..12);
    let s: String = (0..n).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect();
    if s.trim().is_empty() { "x".into() } else { s }
}

fn objective(p: &EncoderParams, text: &str, up: &[f64]) -> f64 {
    p.encode(text).unwrap().iter().zip(up).map(|(a, b)| a * b).sum()
}

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

#[test]
fn backward_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let h = 1e-5;
    let mut checked = 0;
    for draw in 0..50 {
        let cfg = small(draw % 5 != 0);
        let mut p = random_params(&mut rng, cfg);
        let text = random_text(&mut rng);
        let up: Vec<f64> = (0..cfg.dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g = p.encode_backward(&text, &up).unwrap();
        let active: Vec<usize> = p.featurize(&text).unwrap().indices.iter().map(|&i| i as usize).collect();

        // skip draws sitting on a ReLU kink, where the derivative is one-sided
        let act = p.forward(&text).unwrap();
        if act.pre_hidden.iter().any(|z| z.abs() < 1e-3) {
            continue;
        }
        checked += 1;

        let mut check = |name: &str, get: &dyn Fn(&mut EncoderParams) -> &mut f64, analytic: f64| {
            let orig = *get(&mut p);
            *get(&mut p) = orig + h;
            let fp = objective(&p, &text, &up);
            *get(&mut p) = orig - h;
            let fm = objective(&p, &text, &up);
            *get(&mut p) = orig;
            let num = (fp - fm) / (2.0 * h);
            assert!(rel_err(analytic, num) < 1e-4, "draw {draw} {name}: analytic {analytic} numeric {num}");
        };
        for j in 0..cfg.hidden {
            check("b1", &|p| &mut p.b1[j], g.b1[j]);
            for &f in &active {
                check("w1", &|p| &mut p.w1[(f, j)], g.w1[(f, j)]);
            }
            for i in 0..cfg.dim {
                check("w2", &|p| &mut p.w2[(i, j)], g.w2[(i, j)]);
            }
        }
        for i in 0..cfg.dim {
            check("b2", &|p| &mut p.b2[i], g.b2[i]);
        }
        for f in (0..cfg.buckets).filter(|f| !active.contains(f)) {
            assert!(g.w1.row(f).iter().all(|&x| x == 0.0));
        }
    }
    assert!(checked >= 45, "only {checked} draws away from ReLU kinks");
}

#[test]
fn order_sensitive_with_large_tables() {
    let a = featurize("ab", 2, 4, 1 << 16, false).unwrap();
    let b = featurize("ba", 2, 4, 1 << 16, false).unwrap();
    assert_ne!(a, b);
}

proptest! {
    #[test]
    fn encode_is_pure(seed in any::<u64>(), text in "[a-z ]{0,6}[a-z][a-z ]{0,6}") {
        let p = EncoderParams::init(small(true), seed).unwrap();
        let a = p.encode(&text).unwrap();
        let b = p.clone().encode(&text).unwrap();
        prop_assert_eq!(a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn direction_ignores_output_scale(seed in any::<u64>(), c in 1e-3f64..1e3, text in "[a-z]{1,10}") {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_params(&mut rng, small(true));
        let mut q = p.clone();
        q.w2.as_mut_slice().iter_mut().for_each(|w| *w *= c);
        q.b2.iter_mut().for_each(|b| *b *= c);
        let (a, b) = (p.encode(&text).unwrap(), q.encode(&text).unwrap());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn normalized_output_has_unit_norm(seed in any::<u64>(), text in "[a-z]{1,10}") {
        let p = EncoderParams::init(small(true), seed).unwrap();
        let e = p.encode(&text).unwrap();
        let n: f64 = e.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!(n == 0.0 || (n - 1.0).abs() < 1e-9);
    }
}
