mod common;

use common::*;
use proptest::prelude::*;
use wavetomo::{make_mode, GridSpec, ModeSpec};

#[test]
fn lg_modes_carry_their_charge() {
    let g = GridSpec::new(64, 64, 125e-6).unwrap();
    for l in [-3, -1, 1, 2, 4] {
        let f = make_mode(&ModeSpec::laguerre_gaussian(ModeSpec::default_waist(&g), l, 0), g).unwrap();
        for r in 3..=8 {
            assert_eq!(loop_winding(&g, &f.phases(), r), l as i64, "l {l} r {r}");
            assert_eq!(f.winding(r).unwrap().round() as i64, l as i64);
        }
    }
}

#[test]
fn vortex_plate_turns_gaussian_into_a_vortex() {
    let g = GridSpec::new(32, 32, 1e-4).unwrap();
    let f = make_mode(&ModeSpec::gaussian(ModeSpec::default_waist(&g)), g).unwrap().apply_vortex_plate(2);
    for r in 2..=10 {
        assert_eq!(loop_winding(&g, &f.phases(), r), 2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn normalize_is_idempotent(seed in any::<u64>(), nx in 2usize..20, ny in 2usize..20) {
        let g = GridSpec::new(nx, ny, 1e-5).unwrap();
        let once = random_field(g, seed).normalize().unwrap();
        let twice = once.normalize().unwrap();
        prop_assert!((once.power() - 1.0).abs() < 1e-12);
        prop_assert!(max_abs_diff(once.amps(), twice.amps()) < 1e-15);
    }

    #[test]
    fn vortex_plate_is_unitary(seed in any::<u64>(), l in -6i32..=6) {
        let g = GridSpec::new(12, 10, 1e-5).unwrap();
        let f = random_field(g, seed);
        let v = f.apply_vortex_plate(l);
        prop_assert!((v.power() - f.power()).abs() < 1e-12 * f.power());
        prop_assert!(max_abs_diff(v.apply_vortex_plate(-l).amps(), f.amps()) < 1e-12);
    }

    #[test]
    fn gauge_fixing_makes_psi_tilde_real_positive(seed in any::<u64>()) {
        let g = GridSpec::new(7, 5, 1e-5).unwrap();
        let t = random_field(g, seed).gauge_fixed().psi_tilde();
        prop_assert!(t.re > 0.0 && t.im.abs() < 1e-12 * t.re);
    }
}
