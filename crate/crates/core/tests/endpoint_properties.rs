mod common;

use common::endpoint_checks::{check_all, random_trajectory};
use endpower::rng::Stream;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn endpoint_rules_hold(seed in any::<u64>(), id in 0usize..4096) {
        let mut stream = Stream::new(seed, 0, 0);
        let t = random_trajectory(&mut stream, id);
        if let Err(msg) = check_all(&t, &mut stream) {
            prop_assert!(false, "{msg}: {t:?}");
        }
    }
}
