//! Encryption, decryption and homomorphic evaluation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::keygen::{PublicKey, SecretKey};
use crate::ring::{same_context, Context, RingElement};

/// A tuple `(u_1, ..., u_m)` in `Z_{t_1} ⊕ ⋯ ⊕ Z_{t_m}`, always with `0 ≤ u_i < t_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plaintext {
    residues: Vec<BigInt>,
    moduli: Vec<BigInt>,
}

impl Plaintext {
    /// Reduces every residue into `[0, t_i)`.
    pub fn new(residues: Vec<BigInt>, moduli: Vec<BigInt>) -> Result<Self> {
        check_moduli(&residues, &moduli)?;
        let residues = residues.iter().zip(&moduli).map(|(u, t)| u.mod_floor(t)).collect();
        Ok(Plaintext { residues, moduli })
    }

    /// Like [`Plaintext::new`] but rejects residues outside `[0, t_i)`.
    pub fn checked(residues: Vec<BigInt>, moduli: Vec<BigInt>) -> Result<Self> {
        check_moduli(&residues, &moduli)?;
        check_range(&residues, &moduli)?;
        Ok(Plaintext { residues, moduli })
    }

    pub fn zero(moduli: &[BigInt]) -> Self {
        Plaintext { residues: vec![BigInt::zero(); moduli.len()], moduli: moduli.to_vec() }
    }

    pub fn residues(&self) -> &[BigInt] {
        &self.residues
    }

    pub fn moduli(&self) -> &[BigInt] {
        &self.moduli
    }

    pub fn slots(&self) -> usize {
        self.residues.len()
    }
}

impl fmt::Display for Plaintext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.residues.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

fn check_moduli(residues: &[BigInt], moduli: &[BigInt]) -> Result<()> {
    if residues.len() != moduli.len() {
        return Err(Error::DimensionMismatch { expected: moduli.len(), actual: residues.len() });
    }
    if moduli.iter().any(|t| !t.is_positive()) {
        return Err(Error::InvalidParameter("plaintext moduli must be positive".into()));
    }
    Ok(())
}

fn check_range(residues: &[BigInt], moduli: &[BigInt]) -> Result<()> {
    for (index, (u, t)) in residues.iter().zip(moduli).enumerate() {
        if u.is_negative() || u >= t {
            return Err(Error::RangeViolation { index, modulus: t.to_string() });
        }
    }
    Ok(())
}

/// A ciphertext vector together with its slot count. Coordinates are unbounded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    body: RingElement,
    slots: usize,
}

impl Ciphertext {
    pub fn new(body: RingElement, slots: usize) -> Self {
        Ciphertext { body, slots }
    }

    pub fn body(&self) -> &RingElement {
        &self.body
    }

    pub fn context(&self) -> &Context {
        self.body.context()
    }

    pub fn slots(&self) -> usize {
        self.slots
    }

    fn compatible(&self, other: &Ciphertext) -> Result<()> {
        if self.slots != other.slots || !self.body.same_context(&other.body) {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }
}

/// `c = Σ u_i · A_i`.
pub fn encrypt(pk: &PublicKey, u: &Plaintext) -> Result<Ciphertext> {
    if u.slots() != pk.slots() {
        return Err(Error::DimensionMismatch { expected: pk.slots(), actual: u.slots() });
    }
    if u.moduli() != pk.moduli() {
        return Err(Error::InvalidParameter("plaintext moduli differ from the public key".into()));
    }
    check_range(u.residues(), pk.moduli())?;
    let mut body = RingElement::zero(pk.context());
    for (ui, a) in u.residues().iter().zip(pk.crt_vectors()) {
        if !ui.is_zero() {
            body = &body + &a.scale(ui);
        }
    }
    Ok(Ciphertext::new(body, pk.slots()))
}

/// Encrypts raw residues, rejecting any outside `[0, t_i)`.
pub fn encrypt_residues(pk: &PublicKey, residues: &[BigInt]) -> Result<Ciphertext> {
    encrypt(pk, &Plaintext::checked(residues.to_vec(), pk.moduli().to_vec())?)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DecryptMode {
    /// Every residue `c mod I_i` must be a scalar embedding.
    #[default]
    Strict,
    /// Reads the first coordinate of each residue modulo `t_i`.
    Lenient,
}

pub fn decrypt(sk: &SecretKey, c: &Ciphertext, mode: DecryptMode) -> Result<Plaintext> {
    if c.slots() != sk.slots() || !same_context(c.context(), sk.context()) {
        return Err(Error::ContextMismatch);
    }
    let mut residues = Vec::with_capacity(sk.slots());
    for (index, (ideal, t)) in sk.ideals().iter().zip(sk.moduli()).enumerate() {
        let w = ideal.reduce(c.body());
        if mode == DecryptMode::Strict && !w.is_scalar() {
            return Err(Error::MalformedCiphertext { index });
        }
        residues.push(w.coords()[0].mod_floor(t));
    }
    Plaintext::new(residues, sk.moduli().to_vec())
}

pub fn hom_add(c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    c1.compatible(c2)?;
    Ok(Ciphertext::new(&c1.body + &c2.body, c1.slots))
}

pub fn hom_mul(c1: &Ciphertext, c2: &Ciphertext) -> Result<Ciphertext> {
    c1.compatible(c2)?;
    Ok(Ciphertext::new(c1.body.convolve(&c2.body), c1.slots))
}

/// Reduces `c` into `F(I_1 ⋯ I_m)`; decrypts identically.
pub fn compress(sk: &SecretKey, c: &Ciphertext) -> Result<Ciphertext> {
    if c.slots() != sk.slots() || !same_context(c.context(), sk.context()) {
        return Err(Error::ContextMismatch);
    }
    Ok(Ciphertext::new(sk.product_lattice().reduce(c.body()), c.slots))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateOp {
    Add,
    Mul,
}

/// `out = lhs op rhs` over wire identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Gate {
    pub op: GateOp,
    pub lhs: usize,
    pub rhs: usize,
    pub out: usize,
}

/// A straight-line arithmetic circuit.
///
/// Input wires are bound positionally to the caller's values. Every gate reads
/// only wires assigned earlier and writes a fresh wire, so the circuit is acyclic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    inputs: Vec<usize>,
    gates: Vec<Gate>,
    output: usize,
}

impl Circuit {
    /// Validates wiring. `output` defaults to the last gate's wire (or the sole input).
    pub fn new(inputs: Vec<usize>, gates: Vec<Gate>, output: Option<usize>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::MalformedCircuit("no input wires".into()));
        }
        let mut assigned = std::collections::BTreeSet::new();
        for &w in &inputs {
            if !assigned.insert(w) {
                return Err(Error::MalformedCircuit(format!("input wire {w} declared twice")));
            }
        }
        for (k, g) in gates.iter().enumerate() {
            for w in [g.lhs, g.rhs] {
                if !assigned.contains(&w) {
                    return Err(Error::MalformedCircuit(format!("gate {} reads unassigned wire {w}", k + 1)));
                }
            }
            if !assigned.insert(g.out) {
                return Err(Error::MalformedCircuit(format!("gate {} reassigns wire {}", k + 1, g.out)));
            }
        }
        let output = match output {
            Some(w) => w,
            None => match gates.last() {
                Some(g) => g.out,
                None if inputs.len() == 1 => inputs[0],
                None => return Err(Error::MalformedCircuit("output wire is ambiguous".into())),
            },
        };
        if !assigned.contains(&output) {
            return Err(Error::MalformedCircuit(format!("output wire {output} is never assigned")));
        }
        Ok(Circuit { inputs, gates, output })
    }

    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn output(&self) -> usize {
        self.output
    }

    /// Runs the circuit over any value type with fallible `add` and `mul`.
    pub fn evaluate<T, A, M>(&self, values: &[T], mut add: A, mut mul: M) -> Result<T>
    where
        T: Clone,
        A: FnMut(&T, &T) -> Result<T>,
        M: FnMut(&T, &T) -> Result<T>,
    {
        if values.len() != self.inputs.len() {
            return Err(Error::MalformedCircuit(format!(
                "circuit has {} inputs, {} values supplied",
                self.inputs.len(),
                values.len()
            )));
        }
        let mut wires: BTreeMap<usize, T> = self.inputs.iter().copied().zip(values.iter().cloned()).collect();
        for g in &self.gates {
            let (a, b) = (&wires[&g.lhs], &wires[&g.rhs]);
            let v = match g.op {
                GateOp::Add => add(a, b)?,
                GateOp::Mul => mul(a, b)?,
            };
            wires.insert(g.out, v);
        }
        Ok(wires.remove(&self.output).expect("output wire validated"))
    }
}

impl FromStr for Circuit {
    type Err = Error;

    /// Line format: `INPUT w ...`, `ADD i j -> k`, `MUL i j -> k`, optional `OUTPUT w`.
    /// Blank lines and `#` comments are ignored.
    fn from_str(s: &str) -> Result<Self> {
        let mut inputs = Vec::new();
        let mut gates = Vec::new();
        let mut output = None;
        let wire = |tok: &str, line: usize| {
            tok.parse::<usize>()
                .map_err(|_| Error::MalformedCircuit(format!("line {line}: bad wire '{tok}'")))
        };
        for (idx, raw) in s.lines().enumerate() {
            let line = idx + 1;
            let text = raw.split('#').next().unwrap().trim();
            if text.is_empty() {
                continue;
            }
            let toks: Vec<&str> = text.split_whitespace().collect();
            match toks[0].to_ascii_uppercase().as_str() {
                "INPUT" => {
                    if !gates.is_empty() {
                        return Err(Error::MalformedCircuit(format!("line {line}: inputs must precede gates")));
                    }
                    for t in &toks[1..] {
                        inputs.push(wire(t, line)?);
                    }
                }
                "OUTPUT" if toks.len() == 2 => {
                    if output.replace(wire(toks[1], line)?).is_some() {
                        return Err(Error::MalformedCircuit(format!("line {line}: second OUTPUT")));
                    }
                }
                op @ ("ADD" | "MUL") if toks.len() == 5 && toks[3] == "->" => {
                    let op = if op == "ADD" { GateOp::Add } else { GateOp::Mul };
                    gates.push(Gate {
                        op,
                        lhs: wire(toks[1], line)?,
                        rhs: wire(toks[2], line)?,
                        out: wire(toks[4], line)?,
                    });
                }
                _ => return Err(Error::MalformedCircuit(format!("line {line}: cannot parse '{text}'"))),
            }
        }
        Circuit::new(inputs, gates, output)
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ins: Vec<String> = self.inputs.iter().map(ToString::to_string).collect();
        writeln!(f, "INPUT {}", ins.join(" "))?;
        for g in &self.gates {
            let op = match g.op {
                GateOp::Add => "ADD",
                GateOp::Mul => "MUL",
            };
            writeln!(f, "{op} {} {} -> {}", g.lhs, g.rhs, g.out)?;
        }
        writeln!(f, "OUTPUT {}", self.output)
    }
}

pub fn eval_circuit(circuit: &Circuit, inputs: &[Ciphertext]) -> Result<Ciphertext> {
    circuit.evaluate(inputs, hom_add, hom_mul)
}

/// Slotwise evaluation over `Z_{t_1} ⊕ ⋯ ⊕ Z_{t_m}`.
pub fn eval_reference(circuit: &Circuit, inputs: &[Plaintext]) -> Result<Plaintext> {
    let moduli = match inputs.first() {
        Some(p) => p.moduli().to_vec(),
        None => return Err(Error::MalformedCircuit("no inputs supplied".into())),
    };
    if inputs.iter().any(|p| p.moduli() != moduli.as_slice()) {
        return Err(Error::ContextMismatch);
    }
    let slotwise = |f: fn(&BigInt, &BigInt) -> BigInt| {
        let moduli = moduli.clone();
        move |a: &Plaintext, b: &Plaintext| {
            let r = a.residues().iter().zip(b.residues()).map(|(x, y)| f(x, y)).collect();
            Plaintext::new(r, moduli.clone())
        }
    };
    circuit.evaluate(inputs, slotwise(|x, y| x + y), slotwise(|x, y| x * y))
}

/// The all-ones plaintext, the multiplicative identity in every slot.
pub fn plaintext_one(moduli: &[BigInt]) -> Plaintext {
    Plaintext::new(vec![BigInt::one(); moduli.len()], moduli.to_vec()).expect("moduli are positive")
}
