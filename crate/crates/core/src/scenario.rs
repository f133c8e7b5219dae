//! Ready-made models.
//!
//! [`two_vehicle`] is the leader/follower headway scenario: the input
//! `d = [p2, v2]` is the leader's position and velocity, the output
//! `y = [p1, v1]` the follower's.

use crate::linalg::Matrix;
use crate::model::System;
use crate::scalar::Scalar;

/// Identity static gain on `n` channels.
pub fn unit_gain<T: Scalar>(n: usize) -> System<T> {
    System::static_gain(Matrix::identity(n))
}

pub mod two_vehicle {
    use crate::linalg::Matrix;
    use crate::model::{Assumptions, Contract, Guarantees, InitialSet, System};
    use crate::scalar::Scalar;

    /// Scenario parameters in SI units.
    #[derive(Debug, Clone, PartialEq)]
    pub struct Params<T> {
        /// Sampling period (s).
        pub dt: T,
        /// Time headway (s).
        pub h: T,
        /// Largest assumed braking (m/s^2, positive).
        pub a_min: T,
        /// Largest assumed acceleration (m/s^2).
        pub a_max: T,
    }

    impl<T: Scalar> Params<T> {
        /// `dt = 0.1 s`, `h = 2 s`, `|a2| <= 9.8 m/s^2`.
        pub fn nominal() -> Self {
            Self {
                dt: T::ratio(1, 10),
                h: T::from_i64(2).unwrap(),
                a_min: T::ratio(49, 5),
                a_max: T::ratio(49, 5),
            }
        }

        /// The looser contract of the refinement pair:
        /// `h = 1.9 s`, `|a2| <= 9.5 m/s^2`.
        pub fn relaxed() -> Self {
            Self {
                dt: T::ratio(1, 10),
                h: T::ratio(19, 10),
                a_min: T::ratio(19, 2),
                a_max: T::ratio(19, 2),
            }
        }
    }

    fn m<T: Scalar>(rows: &[&[T]]) -> Matrix<T> {
        let cols = rows.first().map_or(0, |r| r.len());
        Matrix::from_rows(cols, &rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).expect("literal matrix")
    }

    /// Follower under the affine law
    /// `a1 = (p2 - p1)/(h dt) - (1/h + 1/dt) v1 + v2/h - 1`,
    /// integrated by forward Euler. The initial set requires the headway to
    /// hold at time zero: `p2(0) - p1(0) - h v1(0) >= 0`.
    pub fn follower_system<T: Scalar>(p: &Params<T>) -> System<T> {
        let (o, z) = (T::one(), T::zero());
        let dt = p.dt.clone();
        let h = p.h.clone();
        let a = m(&[&[o.clone(), dt.clone()], &[-(o.clone() / h.clone()), -(dt.clone() / h.clone())]]);
        let b = m(&[&[z.clone(), z.clone()], &[o.clone() / h.clone(), dt.clone() / h.clone()]]);
        let initial = InitialSet::new(
            m(&[&[o.clone(), h.clone()]]),
            m(&[&[-o.clone(), z.clone()]]),
            vec![z.clone()],
        )
        .expect("literal initial set");
        System::new(
            a,
            b,
            Matrix::identity(2),
            Matrix::zeros(2, 2),
            Some(vec![z, -dt]),
            None,
            initial,
        )
        .expect("follower shapes are consistent")
    }

    /// Leader kinematics `p2+ = p2 + dt v2` and
    /// `-dt a_min <= v2+ - v2 <= dt a_max`.
    pub fn leader_assumptions<T: Scalar>(p: &Params<T>) -> Assumptions<T> {
        let (o, z) = (T::one(), T::zero());
        let dt = p.dt.clone();
        Assumptions::new(
            m(&[
                &[o.clone(), z.clone()],
                &[-o.clone(), z.clone()],
                &[z.clone(), o.clone()],
                &[z.clone(), -o.clone()],
            ]),
            m(&[
                &[-o.clone(), -dt.clone()],
                &[o.clone(), dt.clone()],
                &[z.clone(), -o.clone()],
                &[z.clone(), o.clone()],
            ]),
            vec![z.clone(), z, dt.clone() * p.a_max.clone(), dt * p.a_min.clone()],
        )
        .expect("literal assumptions")
    }

    /// `p2(k) - p1(k) - h v1(k) >= 0` on `[p2, v2, p1, v1]`.
    pub fn headway_guarantee<T: Scalar>(h: &T) -> Guarantees<T> {
        let (o, z) = (T::one(), T::zero());
        Guarantees::new(
            Matrix::zeros(1, 4),
            m(&[&[-o.clone(), z.clone(), o, h.clone()]]),
            vec![z],
        )
        .expect("literal guarantee")
    }

    pub fn headway_contract<T: Scalar>(p: &Params<T>) -> Contract<T> {
        Contract::new(leader_assumptions(p), headway_guarantee(&p.h)).expect("compatible contract")
    }

    /// Leader kinematics plus forward motion `v2(k) >= 0`, with the headway
    /// guarantee. This is the form used for the refinement pair.
    pub fn forward_leader_contract<T: Scalar>(p: &Params<T>) -> Contract<T> {
        let base = leader_assumptions(p);
        let (o, z) = (T::one(), T::zero());
        let a1 = base.a1().vstack(&Matrix::zeros(1, 2)).unwrap();
        let a0 = base.a0().vstack(&m(&[&[z.clone(), -o]])).unwrap();
        let mut rhs = base.rhs().to_vec();
        rhs.push(z);
        let asm = Assumptions::new(a1, a0, rhs).expect("literal assumptions");
        Contract::new(asm, headway_guarantee(&p.h)).expect("compatible contract")
    }

    /// [`forward_leader_contract`] with the follower also guaranteed to move
    /// forward, `v1(k) >= 0`.
    pub fn forward_both_contract<T: Scalar>(p: &Params<T>) -> Contract<T> {
        let base = forward_leader_contract(p);
        let (o, z) = (T::one(), T::zero());
        let g = base.guarantees();
        let gua = Guarantees::new(
            g.g1().vstack(&Matrix::zeros(1, 4)).unwrap(),
            g.g0().vstack(&m(&[&[z.clone(), z.clone(), z.clone(), -o]])).unwrap(),
            vec![z.clone(), z],
        )
        .expect("literal guarantee");
        Contract::new(base.assumptions().clone(), gua).expect("compatible contract")
    }
}
