//! Phaseless Pauli algebra and Pauli frames.
//!
//! A [`PauliFrame`] stores one X bit and one Z bit per physical qubit. Frames
//! form an abelian group under XOR and transform under the Clifford gates used
//! by syndrome extraction circuits (H and CNOT) by simple bit moves:
//!
//! ```text
//! CNOT(c -> t):  x[t] ^= x[c]    (X flows control -> target)
//!                z[c] ^= z[t]    (Z flows target -> control)
//! H(q):          x[q] <-> z[q]
//! ```

use std::fmt;

use crate::error::{Error, Result};

/// Single-qubit Pauli operator with the phase discarded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Pauli {
    #[default]
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Pauli from the 2-bit code `x | z << 1` used by the noise channels.
    pub fn from_code(code: u8) -> Self {
        Self::from_bits(code & 1 != 0, code & 2 != 0)
    }

    pub fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn z_bit(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    /// Product modulo phase.
    pub fn compose(self, other: Pauli) -> Pauli {
        Pauli::from_bits(self.x_bit() ^ other.x_bit(), self.z_bit() ^ other.z_bit())
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        !((self.x_bit() & other.z_bit()) ^ (self.z_bit() & other.x_bit()))
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// Dense phaseless Pauli operator on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliFrame {
    num_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
}

impl PauliFrame {
    /// Identity frame.
    pub fn new(num_qubits: usize) -> Self {
        let words = words_for(num_qubits);
        Self {
            num_qubits,
            x: vec![0; words],
            z: vec![0; words],
        }
    }

    pub fn single(num_qubits: usize, qubit: usize, pauli: Pauli) -> Result<Self> {
        let mut frame = Self::new(num_qubits);
        frame.set(qubit, pauli)?;
        Ok(frame)
    }

    pub fn from_paulis(paulis: &[Pauli]) -> Self {
        let mut frame = Self::new(paulis.len());
        for (q, &p) in paulis.iter().enumerate() {
            frame.set_unchecked(q, p);
        }
        frame
    }

    /// Frame with X on every listed qubit.
    pub fn from_x_support(num_qubits: usize, support: &[usize]) -> Result<Self> {
        let mut frame = Self::new(num_qubits);
        for &q in support {
            frame.check(q)?;
            frame.toggle_x(q);
        }
        Ok(frame)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn check(&self, qubit: usize) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit,
                num_qubits: self.num_qubits,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn x_bit(&self, qubit: usize) -> bool {
        self.x[qubit / 64] >> (qubit % 64) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, qubit: usize) -> bool {
        self.z[qubit / 64] >> (qubit % 64) & 1 == 1
    }

    #[inline]
    pub fn toggle_x(&mut self, qubit: usize) {
        self.x[qubit / 64] ^= 1 << (qubit % 64);
    }

    #[inline]
    pub fn toggle_z(&mut self, qubit: usize) {
        self.z[qubit / 64] ^= 1 << (qubit % 64);
    }

    pub fn get(&self, qubit: usize) -> Result<Pauli> {
        self.check(qubit)?;
        Ok(Pauli::from_bits(self.x_bit(qubit), self.z_bit(qubit)))
    }

    pub fn set(&mut self, qubit: usize, pauli: Pauli) -> Result<()> {
        self.check(qubit)?;
        self.set_unchecked(qubit, pauli);
        Ok(())
    }

    fn set_unchecked(&mut self, qubit: usize, pauli: Pauli) {
        if self.x_bit(qubit) != pauli.x_bit() {
            self.toggle_x(qubit);
        }
        if self.z_bit(qubit) != pauli.z_bit() {
            self.toggle_z(qubit);
        }
    }

    /// Multiply a single-qubit Pauli into the frame.
    pub fn apply(&mut self, qubit: usize, pauli: Pauli) -> Result<()> {
        self.check(qubit)?;
        if pauli.x_bit() {
            self.toggle_x(qubit);
        }
        if pauli.z_bit() {
            self.toggle_z(qubit);
        }
        Ok(())
    }

    /// Clears both components of `qubit`, as a reset does.
    pub fn clear(&mut self, qubit: usize) {
        let mask = !(1u64 << (qubit % 64));
        self.x[qubit / 64] &= mask;
        self.z[qubit / 64] &= mask;
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    /// Number of qubits carrying a non-identity Pauli.
    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(x, z)| (x | z).count_ones() as usize)
            .sum()
    }

    pub fn x_support(&self) -> Vec<usize> {
        (0..self.num_qubits).filter(|&q| self.x_bit(q)).collect()
    }

    pub fn z_support(&self) -> Vec<usize> {
        (0..self.num_qubits).filter(|&q| self.z_bit(q)).collect()
    }

    /// Componentwise XOR (the frame group law).
    pub fn xor(&self, other: &PauliFrame) -> Result<PauliFrame> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &PauliFrame) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::SizeMismatch {
                left: self.num_qubits,
                right: other.num_qubits,
            });
        }
        for (a, b) in self.x.iter_mut().zip(&other.x) {
            *a ^= b;
        }
        for (a, b) in self.z.iter_mut().zip(&other.z) {
            *a ^= b;
        }
        Ok(())
    }

    /// In-place CNOT conjugation. Bounds and `control != target` are the
    /// caller's responsibility.
    #[inline]
    pub fn apply_cnot(&mut self, control: usize, target: usize) {
        if self.x_bit(control) {
            self.toggle_x(target);
        }
        if self.z_bit(target) {
            self.toggle_z(control);
        }
    }

    /// In-place Hadamard conjugation.
    #[inline]
    pub fn apply_h(&mut self, qubit: usize) {
        let (x, z) = (self.x_bit(qubit), self.z_bit(qubit));
        if x != z {
            self.toggle_x(qubit);
            self.toggle_z(qubit);
        }
    }

    pub fn conjugate_through_cnot(&self, control: usize, target: usize) -> Result<PauliFrame> {
        if control == target {
            return Err(Error::InvalidGate(format!(
                "CNOT control and target are both qubit {control}"
            )));
        }
        self.check(control)?;
        self.check(target)?;
        let mut out = self.clone();
        out.apply_cnot(control, target);
        Ok(out)
    }

    pub fn conjugate_through_h(&self, qubit: usize) -> Result<PauliFrame> {
        self.check(qubit)?;
        let mut out = self.clone();
        out.apply_h(qubit);
        Ok(out)
    }
}

impl fmt::Display for PauliFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits {
            write!(f, "{}", Pauli::from_bits(self.x_bit(q), self.z_bit(q)))?;
        }
        Ok(())
    }
}

/// Free-function form of [`PauliFrame::xor`].
pub fn frame_xor(a: &PauliFrame, b: &PauliFrame) -> Result<PauliFrame> {
    a.xor(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frame(paulis: &str) -> PauliFrame {
        let ps: Vec<Pauli> = paulis
            .chars()
            .map(|c| match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                _ => panic!("bad pauli {c}"),
            })
            .collect();
        PauliFrame::from_paulis(&ps)
    }

    #[test]
    fn xor_examples() {
        let x0 = frame("XI");
        assert!(frame_xor(&x0, &x0).unwrap().is_identity());
        assert_eq!(frame_xor(&x0, &frame("ZI")).unwrap(), frame("YI"));
        assert_eq!(
            frame_xor(&frame("IXII"), &frame("IIIX")).unwrap(),
            frame("IXIX")
        );
    }

    #[test]
    fn xor_rejects_size_mismatch() {
        let err = frame_xor(&frame("X"), &frame("XI")).unwrap_err();
        assert_eq!(err, Error::SizeMismatch { left: 1, right: 2 });
    }

    #[test]
    fn cnot_spreads_x_forward_and_z_backward() {
        assert_eq!(frame("XI").conjugate_through_cnot(0, 1).unwrap(), frame("XX"));
        assert_eq!(frame("IZ").conjugate_through_cnot(0, 1).unwrap(), frame("ZZ"));
        assert_eq!(frame("IX").conjugate_through_cnot(0, 1).unwrap(), frame("IX"));
        assert_eq!(frame("ZI").conjugate_through_cnot(0, 1).unwrap(), frame("ZI"));
    }

    #[test]
    fn cnot_rejects_same_qubit_and_out_of_range() {
        assert!(matches!(
            frame("XI").conjugate_through_cnot(1, 1),
            Err(Error::InvalidGate(_))
        ));
        assert!(matches!(
            frame("XI").conjugate_through_cnot(0, 2),
            Err(Error::QubitOutOfRange { .. })
        ));
    }

    #[test]
    fn hadamard_swaps_x_and_z() {
        assert_eq!(frame("X").conjugate_through_h(0).unwrap(), frame("Z"));
        assert_eq!(frame("Y").conjugate_through_h(0).unwrap(), frame("Y"));
        assert_eq!(frame("I").conjugate_through_h(0).unwrap(), frame("I"));
        assert!(frame("I").conjugate_through_h(1).is_err());
    }

    #[test]
    fn cnot_is_self_inverse_on_all_two_qubit_frames() {
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let f = PauliFrame::from_paulis(&[a, b]);
                let twice = f
                    .conjugate_through_cnot(0, 1)
                    .unwrap()
                    .conjugate_through_cnot(0, 1)
                    .unwrap();
                assert_eq!(twice, f, "{a}{b}");
            }
        }
    }

    #[test]
    fn compose_table_is_closed() {
        assert_eq!(Pauli::X.compose(Pauli::Z), Pauli::Y);
        assert_eq!(Pauli::Y.compose(Pauli::Y), Pauli::I);
        assert!(!Pauli::X.commutes_with(Pauli::Z));
        assert!(Pauli::Y.commutes_with(Pauli::Y));
    }

    #[test]
    fn frames_span_word_boundaries() {
        let mut f = PauliFrame::new(130);
        f.set(129, Pauli::Y).unwrap();
        f.set(64, Pauli::X).unwrap();
        assert_eq!(f.weight(), 2);
        assert_eq!(f.x_support(), vec![64, 129]);
        assert_eq!(f.z_support(), vec![129]);
        f.clear(129);
        assert_eq!(f.get(129).unwrap(), Pauli::I);
    }

    fn arb_frame(n: usize) -> impl Strategy<Value = PauliFrame> {
        proptest::collection::vec(0u8..4, n)
            .prop_map(|codes| PauliFrame::from_paulis(&codes.into_iter().map(Pauli::from_code).collect::<Vec<_>>()))
    }

    proptest! {
        #[test]
        fn conjugation_is_a_group_homomorphism(
            a in arb_frame(5),
            b in arb_frame(5),
            c in 0usize..5,
            t in 0usize..5,
        ) {
            prop_assume!(c != t);
            let ab = a.xor(&b).unwrap();
            let lhs = ab.conjugate_through_cnot(c, t).unwrap();
            let rhs = a.conjugate_through_cnot(c, t).unwrap()
                .xor(&b.conjugate_through_cnot(c, t).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            let lhs = ab.conjugate_through_h(c).unwrap();
            let rhs = a.conjugate_through_h(c).unwrap()
                .xor(&b.conjugate_through_h(c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn xor_is_an_abelian_group(a in arb_frame(7), b in arb_frame(7)) {
            prop_assert_eq!(a.xor(&b).unwrap(), b.xor(&a).unwrap());
            prop_assert!(a.xor(&a).unwrap().is_identity());
            prop_assert_eq!(a.xor(&PauliFrame::new(7)).unwrap(), a);
        }
    }
}
