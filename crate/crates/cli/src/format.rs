//! Versioned JSON file formats. Every integer is a decimal string.

use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crtfhe::keygen::SchemeParams;
use crtfhe::{Ciphertext, Context, IdealLattice, IntegerMatrix, ModulusPolynomial, PublicKey, RingElement, SecretKey};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    General,
    Cyclotomic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FileKind {
    Public,
    Secret,
    Ciphertext,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublicKeyFile {
    pub version: u32,
    pub kind: FileKind,
    pub scheme: Scheme,
    /// `φ_0, ..., φ_{n−1}` with `φ(x) = x^n − Σ φ_i x^i`.
    pub phi: Vec<String>,
    pub p: Option<u64>,
    pub m: usize,
    pub moduli: Vec<String>,
    pub crt_vectors: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdealEntry {
    /// HNF basis, row-major.
    pub hnf: Vec<Vec<String>>,
    pub generator: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecretKeyFile {
    pub version: u32,
    pub kind: FileKind,
    pub fingerprint: String,
    pub scheme: Scheme,
    pub phi: Vec<String>,
    pub p: Option<u64>,
    pub primes: Option<Vec<u64>>,
    pub m: usize,
    pub moduli: Vec<String>,
    pub ideals: Vec<IdealEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CiphertextFile {
    pub version: u32,
    pub kind: FileKind,
    pub fingerprint: String,
    pub phi: Vec<String>,
    pub p: Option<u64>,
    pub slots: usize,
    pub n: usize,
    pub coords: Vec<String>,
}

fn strings(v: &[BigInt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn parse_int(s: &str, what: &str) -> Result<BigInt, CliError> {
    s.parse::<BigInt>().map_err(|_| CliError::Input(format!("{what}: '{s}' is not a decimal integer")))
}

fn parse_ints(v: &[String], what: &str) -> Result<Vec<BigInt>, CliError> {
    v.iter().map(|s| parse_int(s, what)).collect()
}

fn input(e: crtfhe::Error) -> CliError {
    CliError::Input(e.to_string())
}

fn context_from(phi: &[String], p: Option<u64>) -> Result<Context, CliError> {
    let mut poly = ModulusPolynomial::new(parse_ints(phi, "phi")?).map_err(input)?;
    if let Some(p) = p {
        poly = poly.with_cyclotomic_prime(p).map_err(input)?;
    }
    Ok(Arc::new(poly))
}

fn element(ctx: &Context, coords: &[String], what: &str) -> Result<RingElement, CliError> {
    RingElement::new(ctx, parse_ints(coords, what)?).map_err(input)
}

pub fn fingerprint(pk: &PublicKeyFile) -> String {
    let canonical = serde_json::to_vec(pk).expect("serializable");
    hex::encode(Sha256::digest(&canonical))
}

fn check_header(version: u32, kind: FileKind, expected: FileKind) -> Result<(), CliError> {
    if version != FORMAT_VERSION {
        return Err(CliError::Input(format!("unsupported format version {version} (expected {FORMAT_VERSION})")));
    }
    if kind != expected {
        return Err(CliError::Input(format!("expected a {expected:?} file, found {kind:?}").to_lowercase()));
    }
    Ok(())
}

impl PublicKeyFile {
    pub fn from_key(pk: &PublicKey) -> Self {
        let ctx = pk.context();
        PublicKeyFile {
            version: FORMAT_VERSION,
            kind: FileKind::Public,
            scheme: if ctx.cyclotomic_prime().is_some() { Scheme::Cyclotomic } else { Scheme::General },
            phi: strings(ctx.phi_coeffs()),
            p: ctx.cyclotomic_prime(),
            m: pk.slots(),
            moduli: strings(pk.moduli()),
            crt_vectors: pk.crt_vectors().iter().map(|a| strings(a.coords())).collect(),
        }
    }

    pub fn to_key(&self) -> Result<PublicKey, CliError> {
        check_header(self.version, self.kind, FileKind::Public)?;
        if (self.scheme == Scheme::Cyclotomic) != self.p.is_some() {
            return Err(CliError::Input("scheme and p disagree".into()));
        }
        let ctx = context_from(&self.phi, self.p)?;
        if self.m != self.moduli.len() || self.m != self.crt_vectors.len() {
            return Err(CliError::Input(format!("m = {} but the file lists a different number of slots", self.m)));
        }
        let crt = self.crt_vectors.iter().map(|a| element(&ctx, a, "crt_vectors")).collect::<Result<_, _>>()?;
        PublicKey::new(&ctx, crt, parse_ints(&self.moduli, "moduli")?).map_err(input)
    }
}

impl SecretKeyFile {
    pub fn from_key(sk: &SecretKey, fingerprint: String) -> Self {
        let ctx = sk.context();
        let (scheme, p, primes) = match sk.params() {
            SchemeParams::General => (Scheme::General, None, None),
            SchemeParams::Cyclotomic { p, primes } => (Scheme::Cyclotomic, Some(*p), Some(primes.clone())),
        };
        SecretKeyFile {
            version: FORMAT_VERSION,
            kind: FileKind::Secret,
            fingerprint,
            scheme,
            phi: strings(ctx.phi_coeffs()),
            p,
            primes,
            m: sk.slots(),
            moduli: strings(sk.moduli()),
            ideals: sk
                .ideals()
                .iter()
                .map(|i| IdealEntry {
                    hnf: i.hnf_basis().to_rows().iter().map(|r| strings(r)).collect(),
                    generator: i.generator().map(|g| strings(g.coords())),
                })
                .collect(),
        }
    }

    /// Rebuilds the key, re-validating every structural invariant.
    pub fn to_key(&self) -> Result<SecretKey, CliError> {
        check_header(self.version, self.kind, FileKind::Secret)?;
        let ctx = context_from(&self.phi, self.p)?;
        if self.m != self.ideals.len() || self.m != self.moduli.len() {
            return Err(CliError::Input(format!("m = {} but the file lists a different number of ideals", self.m)));
        }
        let mut ideals = Vec::with_capacity(self.m);
        for entry in &self.ideals {
            let rows = entry.hnf.iter().map(|r| parse_ints(r, "hnf")).collect::<Result<Vec<_>, _>>()?;
            if rows.len() != ctx.degree() || rows.iter().any(|r| r.len() != ctx.degree()) {
                return Err(CliError::Input("HNF basis has the wrong shape".into()));
            }
            let generator = entry.generator.as_ref().map(|g| element(&ctx, g, "generator")).transpose()?;
            ideals.push(IdealLattice::from_hnf_checked(&ctx, IntegerMatrix::from_rows(rows), generator).map_err(input)?);
        }
        let params = match (self.scheme, self.p, &self.primes) {
            (Scheme::General, None, None) => SchemeParams::General,
            (Scheme::Cyclotomic, Some(p), Some(primes)) => SchemeParams::Cyclotomic { p, primes: primes.clone() },
            _ => return Err(CliError::Input("scheme, p and primes disagree".into())),
        };
        let sk = SecretKey::new(ideals, params).map_err(input)?;
        if strings(sk.moduli()) != self.moduli {
            return Err(CliError::Input("stored moduli differ from the HNF bases".into()));
        }
        Ok(sk)
    }
}

impl CiphertextFile {
    pub fn from_ciphertext(c: &Ciphertext, fingerprint: &str) -> Self {
        let ctx = c.context();
        CiphertextFile {
            version: FORMAT_VERSION,
            kind: FileKind::Ciphertext,
            fingerprint: fingerprint.to_string(),
            phi: strings(ctx.phi_coeffs()),
            p: ctx.cyclotomic_prime(),
            slots: c.slots(),
            n: ctx.degree(),
            coords: strings(c.body().coords()),
        }
    }

    pub fn to_ciphertext(&self) -> Result<Ciphertext, CliError> {
        check_header(self.version, self.kind, FileKind::Ciphertext)?;
        let ctx = context_from(&self.phi, self.p)?;
        if self.n != ctx.degree() || self.coords.len() != self.n {
            return Err(CliError::Input(format!("ciphertext length {} does not match n = {}", self.coords.len(), ctx.degree())));
        }
        Ok(Ciphertext::new(element(&ctx, &self.coords, "coords")?, self.slots))
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    match value.get("version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => return Err(CliError::Input(format!("{}: unsupported format version {v}", path.display()))),
        None => return Err(CliError::Input(format!("{}: missing version field", path.display()))),
    }
    serde_json::from_value(value).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Peeks at the `kind` field.
pub fn file_kind(path: &Path) -> Result<FileKind, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let kind = value.get("kind").cloned().ok_or_else(|| CliError::Input(format!("{}: missing kind field", path.display())))?;
    serde_json::from_value(kind).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crtfhe::fhe::{encrypt_residues, hom_mul};
    use crtfhe::keygen::{gen_public, gen_secret_general, secret_from_primes};
    use rand::SeedableRng;

    #[test]
    fn round_trips_are_exact() {
        let sk = secret_from_primes(13, &[89, 97, 83]).unwrap();
        let pk = gen_public(&sk).unwrap();
        let pf = PublicKeyFile::from_key(&pk);
        let fp = fingerprint(&pf);
        assert_eq!(pf.to_key().unwrap(), pk);
        let sf = SecretKeyFile::from_key(&sk, fp.clone());
        let back = sf.to_key().unwrap();
        assert_eq!(back.ideals(), sk.ideals());
        assert_eq!(back.params(), sk.params());
        let c = encrypt_residues(&pk, &pk.moduli().iter().map(|t| t - 1).collect::<Vec<_>>()).unwrap();
        let c = hom_mul(&c, &c).unwrap();
        assert!(c.body().coords().iter().any(|x| x.bits() > 64));
        let cf = CiphertextFile::from_ciphertext(&c, &fp);
        let json = serde_json::to_string(&cf).unwrap();
        let parsed: CiphertextFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed.to_ciphertext().unwrap(), c);
    }

    #[test]
    fn general_keys_round_trip() {
        let phi = ModulusPolynomial::from_i64(&[-1, -1, 0]).unwrap();
        let sk = gen_secret_general(&phi, 3, &mut rand_chacha::ChaCha20Rng::seed_from_u64(1), 4).unwrap();
        let pk = gen_public(&sk).unwrap();
        let sf = SecretKeyFile::from_key(&sk, fingerprint(&PublicKeyFile::from_key(&pk)));
        assert_eq!(sf.to_key().unwrap().ideals(), sk.ideals());
    }

    #[test]
    fn rejects_tampering() {
        let sk = secret_from_primes(3, &[2, 7]).unwrap();
        let pk = gen_public(&sk).unwrap();
        let mut pf = PublicKeyFile::from_key(&pk);
        pf.version = 2;
        assert!(matches!(pf.to_key(), Err(CliError::Input(_))));
        let mut sf = SecretKeyFile::from_key(&sk, String::new());
        sf.ideals[1] = sf.ideals[0].clone();
        assert!(matches!(sf.to_key(), Err(CliError::Input(_))));
        let mut sf = SecretKeyFile::from_key(&sk, String::new());
        sf.ideals[0].hnf[0][1] = "7".into();
        assert!(matches!(sf.to_key(), Err(CliError::Input(_))));
    }
}
