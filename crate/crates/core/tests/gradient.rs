mod common;

use dodo_core::model::LossKind;

#[test]
fn backprop_matches_central_differences() {
    for seed in [1, 2, 3] {
        for kind in [LossKind::Revised, LossKind::Pnll] {
            for t in common::gradient_check(kind, seed) {
                println!("{kind:?} seed {seed} {}: relative error {:.3e}", t.name, t.relative_error);
                assert!(t.passes(1e-4), "{kind:?} seed {seed} {}: {:e}", t.name, t.relative_error);
            }
        }
    }
}
