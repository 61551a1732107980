//! Fixtures shared by the benchmarks.

use diamond_bell::kernel::Mass;
use diamond_bell::testfn::BellParameters;

/// The largest tabulated CHSH violation at `m ≈ 4e-6`.
pub fn bell_fixture() -> BellParameters {
    BellParameters {
        a: 0.753259,
        eta: 0.249479,
        b: 0.413562,
        sigma: 0.0140057,
        a_prime: 4.97831,
        eta_prime: 4.43684,
        b_prime: 0.898361,
        sigma_prime: 7.15717,
        m: Mass::new(4.14395e-6).expect("valid mass"),
        r: 0.815919,
        r_prime: 0.752558,
    }
}
