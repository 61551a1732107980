//! Fixed bilinear cases for comparing backends.

use crate::kernel::Mass;
use crate::testfn::{left_diamond, right_diamond, third_diamond, DiamondBump};

use super::KernelKind;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossCheckCase {
    pub kind: KernelKind,
    pub f: DiamondBump,
    pub g: DiamondBump,
    pub m: Mass,
}

fn case(kind: KernelKind, f: DiamondBump, g: DiamondBump, m: f64) -> CrossCheckCase {
    CrossCheckCase {
        kind,
        f,
        g,
        m: Mass::new(m).expect("suite masses are valid"),
    }
}

/// Twenty cases: self, tangent, gapped and overlapping pairs over masses
/// `1e-8 ..= 3`, soft and sharp profiles, both kernels.
pub fn cross_check_suite() -> Vec<CrossCheckCase> {
    use KernelKind::{Hadamard as H, PauliJordan as P};
    let r = |radius, a, amp| right_diamond(radius, a, amp).expect("valid bump");
    let l = |radius, a, amp| left_diamond(radius, a, amp).expect("valid bump");
    let t = |radius, gap, a, amp| third_diamond(radius, gap, a, amp).expect("valid bump");
    let c = |x, radius, a, amp| DiamondBump::new(x, radius, a, amp).expect("valid bump");
    vec![
        case(H, r(1.0, 0.5, 1.0), r(1.0, 0.5, 1.0), 0.3),
        case(H, r(2.0, 0.1, 1.0), r(2.0, 0.1, 1.0), 1.0),
        case(H, r(0.8, 4.0, 3.0), r(0.8, 4.0, 3.0), 1e-6),
        case(H, l(0.75, 0.9, 7.0), l(0.75, 0.9, 7.0), 4e-6),
        case(H, r(1.0, 0.5, 1.0), l(0.8, 0.3, 2.0), 0.3),
        case(H, r(0.82, 0.75, 0.25), l(0.75, 0.9, 7.2), 4e-6),
        case(H, r(0.87, 0.5, 0.18), l(0.87, 2.0, 11.0), 2.6e-8),
        case(H, r(1.86, 0.45, 0.06), l(0.84, 0.7, 4.1), 9.4e-3),
        case(H, r(0.8, 0.02, 0.4), t(0.8, 1.6, 0.5, 1.0), 0.3),
        case(H, r(1.8, 0.3, 0.24), t(1.8, 3.6, 0.5, 0.68), 0.15),
        case(H, r(1.0, 0.2, 1.0), t(1.0, 0.5, 6.0, 2.0), 3.0),
        case(H, c(1.0, 1.0, 0.4, 1.2), c(1.5, 0.8, 0.9, -0.7), 0.3),
        case(H, c(0.0, 1.5, 0.05, 1.0), c(0.3, 0.5, 2.0, 1.0), 0.01),
        case(H, r(3.0, 1.0, 0.5), r(0.5, 0.1, 2.0), 1e-3),
        case(H, l(2.5, 8.0, 10.0), r(0.6, 0.05, 0.3), 0.5),
        case(P, r(1.0, 0.5, 1.0), r(1.0, 0.5, 1.0), 0.3),
        case(P, r(1.0, 0.5, 1.0), l(0.8, 0.3, 2.0), 0.3),
        case(P, c(1.0, 1.0, 0.4, 1.2), c(1.5, 0.8, 0.9, -0.7), 0.3),
        case(P, r(0.8, 0.02, 0.4), t(0.8, 1.6, 0.5, 1.0), 1e-6),
        case(P, c(0.0, 1.5, 0.05, 1.0), c(0.3, 0.5, 2.0, 1.0), 1.0),
    ]
}
