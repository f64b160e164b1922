use cascade_ode::cascade::cascade;
use cascade_ode::expr::{normalize, Expr, Term};
use cascade_ode::format::{format, Style};
use cascade_ode::parse::parse_forcing;
use cascade_ode::real::{realify, RealExpr, RealTerm, Trig};
use cascade_ode::roots::{find_roots_numeric, CharPoly, DEFAULT_ROOT_TOL};
use cascade_ode::scalar::Scalar;
use cascade_ode::testing::*;
use cascade_ode::verify::{equal_mod_homogeneous, oracle_undetermined_coefficients, residual_symbolic, ResidualStatus};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn permutations(v: &[Scalar]) -> Vec<Vec<Scalar>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head.clone());
            out.push(p);
        }
    }
    out
}

fn random_real_expr(r: &mut StdRng) -> RealExpr {
    use rand::Rng;
    let count = r.gen_range(1..=4);
    let terms = (0..count)
        .map(|_| RealTerm {
            coeff: small_rational(r),
            tpow: r.gen_range(0..=3),
            logpow: r.gen_range(0..=1),
            alpha: small_rational(r),
            beta: Scalar::from_int(r.gen_range(0..=3)),
            trig: if r.gen_bool(0.5) { Trig::Cos } else { Trig::Sin },
        })
        .collect();
    RealExpr::from_terms(terms)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn antiderivative_then_derivative_is_identity(seed in any::<u64>()) {
        let e = random_antiderivable(&mut rng(seed));
        prop_assert_eq!(e.antiderivative().unwrap().differentiate(), e.clone());
        let f = e.to_approx();
        prop_assert!(f.antiderivative().unwrap().differentiate().approx_eq(&f, 1e-12));
    }

    #[test]
    fn differentiation_is_linear(s1 in any::<u64>(), s2 in any::<u64>()) {
        let mut r = rng(s1 ^ s2.rotate_left(7));
        let (a, b) = (random_antiderivable(&mut r), random_antiderivable(&mut r));
        let c = small_gauss(&mut r);
        prop_assert_eq!(a.add(&b).differentiate(), a.differentiate().add(&b.differentiate()));
        prop_assert_eq!(a.scale(&c).differentiate(), a.differentiate().scale(&c));
    }

    #[test]
    fn canonical_form_is_unique(seed in any::<u64>()) {
        let e = random_antiderivable(&mut rng(seed));
        prop_assert_eq!(normalize(e.terms().to_vec()), e.clone());
        let mut rev: Vec<Term> = e.terms().to_vec();
        rev.reverse();
        prop_assert_eq!(normalize(rev), e.clone());
        prop_assert!(e.add(&e.scale(&-Scalar::one())).is_zero());
    }

    #[test]
    fn realify_inverts_the_euler_embedding(seed in any::<u64>()) {
        let r = random_real_expr(&mut rng(seed));
        prop_assert_eq!(realify(&r.to_expr()).unwrap(), r);
    }

    #[test]
    fn plain_format_parses_back(seed in any::<u64>()) {
        let e = random_antiderivable(&mut rng(seed));
        let text = format(&e, Style::Plain);
        prop_assert_eq!(parse_forcing(&text).unwrap(), e, "{}", text);
    }

    #[test]
    fn every_stage_solves_its_equation(seed in any::<u64>()) {
        let p = random_problem(&mut rng(seed), 4);
        let tr = cascade(&p.roots, p.ode.forcing(), p.ode.leading()).unwrap();
        for s in &tr.stages {
            prop_assert_eq!(s.output.differentiate().sub(&s.output.scale(&s.root)), s.input.clone());
        }
        for w in tr.stages.windows(2) {
            prop_assert_eq!(&w[0].output, &w[1].input);
        }
    }

    #[test]
    fn resonant_forcing_still_closes(seed in any::<u64>()) {
        let p = random_resonant_problem(&mut rng(seed), 4);
        let tr = cascade(&p.roots, p.ode.forcing(), p.ode.leading()).unwrap();
        prop_assert_eq!(residual_symbolic(&p.ode, &tr.particular).status, ResidualStatus::ExactZero);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn root_order_does_not_matter(seed in any::<u64>()) {
        let p = random_problem(&mut rng(seed), 4);
        let mut first: Option<Expr> = None;
        for perm in permutations(&p.roots) {
            let y = cascade(&perm, p.ode.forcing(), p.ode.leading()).unwrap().particular;
            prop_assert_eq!(residual_symbolic(&p.ode, &y).status, ResidualStatus::ExactZero);
            match &first {
                None => first = Some(y),
                Some(y0) => prop_assert!(equal_mod_homogeneous(&p.ode, y0, &y)),
            }
        }
    }

    #[test]
    fn cascade_agrees_with_undetermined_coefficients(seed in any::<u64>()) {
        let p = random_resonant_problem(&mut rng(seed), 4);
        let y = cascade(&p.roots, p.ode.forcing(), p.ode.leading()).unwrap().particular;
        let z = oracle_undetermined_coefficients(&p.ode, p.ode.forcing()).unwrap();
        prop_assert_eq!(residual_symbolic(&p.ode, &z).status, ResidualStatus::ExactZero);
        prop_assert!(equal_mod_homogeneous(&p.ode, &y, &z));
    }

    #[test]
    fn planted_roots_are_recovered(seed in any::<u64>()) {
        let (coeffs, planted) = planted_polynomial(&mut rng(seed), 8);
        let p = CharPoly::new(coeffs.iter().map(|&c| Scalar::approx(c, 0.0)).collect());
        let found = find_roots_numeric(&p, DEFAULT_ROOT_TOL).unwrap();
        prop_assert_eq!(found.degree(), planted.len());
        for z in planted {
            let best = found.entries().iter().map(|r| (r.value.to_c64() - z).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(best < 1e-8, "root {} missed by {:e}", z, best);
        }
    }
}
