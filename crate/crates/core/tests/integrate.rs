use padic_harmonic::integrate::{integrate, local_constancy_depth, Domain, Mode, Window, LEVEL_CAP};
use padic_harmonic::localfield::{conductor_character, FieldSpec, TruncatedElement};
use padic_harmonic::{Cyc, Rational, Result};
use proptest::prelude::*;

fn field(p: u32, pos: bool) -> FieldSpec {
    if pos {
        FieldSpec::fpt(p).unwrap()
    } else {
        FieldSpec::qp(p).unwrap()
    }
}

/// `Λ(c x^2 + d x)` with `c = ϖ^vc`, `d = e ϖ^vd`.
fn quad(f: FieldSpec, vc: i64, vd: i64, e: u32) -> impl Fn(&[TruncatedElement]) -> Result<Cyc> + Sync {
    let c = TruncatedElement::monomial(f, 1, vc).unwrap();
    let d = TruncatedElement::monomial(f, e, vd).unwrap();
    move |x: &[TruncatedElement]| {
        let s = c.mul(&x[0].mul(&x[0])?)?.add(&d.mul(&x[0])?)?;
        Ok(Cyc::root(f.p(), conductor_character(&s, LEVEL_CAP)?))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn additivity_over_shell_partitions(p in prop_oneof![Just(3u32), Just(5)], pos: bool, vc in -1i64..2, vd in -1i64..2, e in 1u32..3, k in 1i64..3) {
        let f = field(p, pos);
        let g = quad(f, vc, vd, e);
        let m = 3;
        let (whole, _) = integrate(f, &Domain::Box(vec![Window::ball(0)]), &g, m, Mode::OneShot).unwrap();
        let mut parts = integrate(f, &Domain::Box(vec![Window::ball(k)]), &g, m, Mode::OneShot).unwrap().0;
        for v in 0..k {
            parts = parts.add(&integrate(f, &Domain::Box(vec![Window::shell(v)]), &g, m, Mode::OneShot).unwrap().0);
        }
        prop_assert_eq!(whole, parts);
    }

    #[test]
    fn scaling(p in prop_oneof![Just(3u32), Just(5)], pos: bool, vc in -1i64..2, vd in -1i64..2, e in 1u32..3) {
        let f = field(p, pos);
        let g = quad(f, vc, vd, e);
        let pi = TruncatedElement::uniformizer(f);
        let scaled = |u: &[TruncatedElement]| g(&[pi.mul(&u[0])?]);
        let (lhs, _) = integrate(f, &Domain::Box(vec![Window::ball(1)]), &g, 4, Mode::OneShot).unwrap();
        let (rhs, _) = integrate(f, &Domain::Box(vec![Window::ball(0)]), &scaled, 3, Mode::OneShot).unwrap();
        prop_assert_eq!(lhs, rhs.scale(&Rational::new(1.into(), (p as i64).into())));
    }
}

/// Once the depth passes the local-constancy depth, refining changes nothing.
#[test]
fn refinement_stability() {
    for pos in [false, true] {
        let f = field(3, pos);
        for (vc, vd) in [(-1, 0), (0, -1), (-1, -1), (1, -2)] {
            let g = quad(f, vc, vd, 1);
            let mut need = 1;
            for x in 0..9 {
                let pt = [TruncatedElement::from_int(f, x)];
                need = need.max(local_constancy_depth(&g, &pt, 6).unwrap());
            }
            let (v, c) = integrate(f, &Domain::Box(vec![Window::ball(0)]), &g, need, Mode::Refine).unwrap();
            assert_eq!(c.stabilized, Some(true), "{vc} {vd}");
            let (w, _) = integrate(f, &Domain::Box(vec![Window::ball(0)]), &g, need + 2, Mode::OneShot).unwrap();
            assert_eq!(v, w);
        }
    }
}

/// Two-dimensional additivity: splitting one coordinate leaves the total unchanged.
#[test]
fn product_boxes() {
    let f = field(3, false);
    let pi_inv = TruncatedElement::uniformizer(f).inv().unwrap();
    let g = |x: &[TruncatedElement]| Ok(Cyc::root(3, conductor_character(&x[0].mul(&x[1])?.mul(&pi_inv)?, LEVEL_CAP)?));
    let whole = integrate(f, &Domain::Box(vec![Window::ball(0), Window::ball(0)]), &g, 2, Mode::Refine).unwrap();
    assert_eq!(whole.1.stabilized, Some(true));
    let a = integrate(f, &Domain::Box(vec![Window::shell(0), Window::ball(0)]), &g, 2, Mode::OneShot).unwrap().0;
    let b = integrate(f, &Domain::Box(vec![Window::ball(1), Window::ball(0)]), &g, 2, Mode::OneShot).unwrap().0;
    assert_eq!(whole.0, a.add(&b));
    // y ↦ Λ(xy/ϖ) is trivial on Ω exactly when x ∈ 𝔭^2
    assert_eq!(whole.0.to_scalar(), Some(Rational::new(1.into(), 9.into())));
}
