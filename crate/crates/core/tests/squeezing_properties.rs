use metrofi::channels::PauliChannel;
use metrofi::smallsys::{qfi, SensingFamily};
use metrofi::squeezing::{align_squeezing, noisy_squeeze_fi, oat_state};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn noisy_fi_is_monotone_in_dephasing(n in 4usize..200, t in 0.0f64..0.5, p1 in 0.0f64..0.5, dp in 0.0f64..0.1) {
        let st = align_squeezing(&oat_state(n, t).unwrap()).unwrap();
        let p2 = (p1 + dp).min(0.5);
        let f1 = noisy_squeeze_fi(&st, &PauliChannel::dephasing(p1, 0.0).unwrap(), 0.0).unwrap();
        let f2 = noisy_squeeze_fi(&st, &PauliChannel::dephasing(p2, 0.0).unwrap(), 0.0).unwrap();
        prop_assert!(f2 <= f1 * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn squeezed_readout_respects_qfi(n in 2usize..7, t in 0.0f64..1.0, p in 0.0f64..0.3) {
        let st = align_squeezing(&oat_state(n, t).unwrap()).unwrap();
        let noise = PauliChannel::dephasing(p, 0.0).unwrap();
        let f = noisy_squeeze_fi(&st, &noise, 0.0).unwrap();
        let q = qfi(&SensingFamily::new(st.to_pure_state().unwrap().to_density(), noise), 0.0).unwrap();
        prop_assert!(f <= q + 1e-8, "{} > {}", f, q);
    }
}
