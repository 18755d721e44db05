use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde_json::json;

use crtfhe::fhe::{self, encrypt_residues, eval_circuit, hom_add, hom_mul};
use crtfhe::keygen::{
    check_crt_congruences, cyclotomic_modulus, gen_public, gen_secret_cyclotomic, gen_secret_general,
    secret_from_primes, SchemeParams,
};
use crtfhe::lattice::principal_ideal;
use crtfhe::security::{
    brute_force_knapsack, covering_radius_estimate, norm_bound_trials, norm_constants, public_decrypt,
    scheme_as_knapsack,
};
use crtfhe::{Ciphertext, Circuit, Context, DecryptMode, ModulusPolynomial, PublicKey, RingElement, SecretKey};

use crate::error::CliError;
use crate::format::{
    file_kind, fingerprint, read_json, write_json, CiphertextFile, FileKind, PublicKeyFile, SecretKeyFile,
};

#[derive(Debug, Parser)]
#[command(name = "crtfhe", version, about = "Noise-free homomorphic encryption over ideal lattices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a secret/public key pair.
    Keygen(KeygenArgs),
    /// Encrypt a comma-separated plaintext tuple.
    Encrypt {
        public: PathBuf,
        #[arg(allow_hyphen_values = true)]
        plaintext: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decrypt a ciphertext and print its residues.
    Decrypt {
        secret: PathBuf,
        ciphertext: PathBuf,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Homomorphic sum of two ciphertexts.
    Add { left: PathBuf, right: PathBuf, #[arg(long)] out: Option<PathBuf> },
    /// Homomorphic product of two ciphertexts.
    Mul { left: PathBuf, right: PathBuf, #[arg(long)] out: Option<PathBuf> },
    /// Evaluate a circuit file over ciphertexts bound to its input wires in order.
    Eval {
        circuit: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Describe a key or ciphertext file.
    Inspect {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Re-run the key-pair self-checks.
    Verify { secret: PathBuf, public: PathBuf },
    /// Run the randomized security suites and emit a results table.
    Report {
        #[arg(long, env = "CRTFHE_SEED")]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    General,
    Cyclotomic,
}

#[derive(Debug, Args)]
pub struct KeygenArgs {
    #[arg(long, value_enum, default_value_t = SchemeArg::Cyclotomic)]
    pub scheme: SchemeArg,
    /// Odd prime selecting the cyclotomic modulus.
    #[arg(long)]
    pub p: Option<u64>,
    /// Number of plaintext slots.
    #[arg(long)]
    pub m: Option<usize>,
    /// Upper bound for sampled primes.
    #[arg(long, default_value_t = 100)]
    pub q_max: u64,
    /// Explicit comma-separated primes instead of sampling.
    #[arg(long, value_delimiter = ',')]
    pub primes: Option<Vec<u64>>,
    /// Comma-separated φ_0,…,φ_{n−1} of φ(x) = x^n − Σ φ_i x^i (general scheme).
    #[arg(long, allow_hyphen_values = true)]
    pub phi: Option<String>,
    /// Coefficient bound for sampled generators (general scheme).
    #[arg(long, default_value_t = 3)]
    pub coeff_bound: u64,
    #[arg(long, env = "CRTFHE_SEED")]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[group(multiple = false)]
pub struct ModeArgs {
    /// Read the first residue coordinate even when the tail is nonzero.
    #[arg(long)]
    pub lenient: bool,
    /// Reject residues that are not scalar embeddings (default).
    #[arg(long)]
    pub strict: bool,
}

pub const SECRET_FILE: &str = "secret.json";
pub const PUBLIC_FILE: &str = "public.json";

pub fn run(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Keygen(args) => keygen(&args),
        Command::Encrypt { public, plaintext, out } => encrypt(&public, &plaintext, out.as_deref()),
        Command::Decrypt { secret, ciphertext, mode } => {
            let mode = if mode.lenient { DecryptMode::Lenient } else { DecryptMode::Strict };
            decrypt(&secret, &ciphertext, mode)
        }
        Command::Add { left, right, out } => binary(&left, &right, out.as_deref(), hom_add),
        Command::Mul { left, right, out } => binary(&left, &right, out.as_deref(), hom_mul),
        Command::Eval { circuit, inputs, out } => eval(&circuit, &inputs, out.as_deref()),
        Command::Inspect { file, json } => inspect(&file, json),
        Command::Verify { secret, public } => verify(&secret, &public),
        Command::Report { seed, trials, out } => report(seed, trials, out.as_deref()),
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| rand::rngs::OsRng.gen())
}

fn parse_list(s: &str, what: &str) -> Result<Vec<BigInt>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse::<BigInt>().map_err(|_| CliError::Input(format!("{what}: '{x}' is not an integer"))))
        .collect()
}

fn keygen(args: &KeygenArgs) -> Result<String, CliError> {
    let seed = resolve_seed(args.seed);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sk = match args.scheme {
        SchemeArg::Cyclotomic => {
            let p = args.p.ok_or_else(|| CliError::Input("--p is required for the cyclotomic scheme".into()))?;
            if p < 3 || !crtfhe::primes::is_prime(p) {
                return Err(CliError::Input(format!("p = {p} must be an odd prime")));
            }
            if args.phi.is_some() {
                return Err(CliError::Input("--phi applies only to the general scheme".into()));
            }
            match &args.primes {
                Some(primes) => {
                    if args.m.is_some_and(|m| m != primes.len()) {
                        return Err(CliError::Input("--m disagrees with the number of --primes".into()));
                    }
                    secret_from_primes(p, primes)?
                }
                None => gen_secret_cyclotomic(p, args.m.unwrap_or(2), &mut rng, args.q_max)?,
            }
        }
        SchemeArg::General => {
            if args.primes.is_some() || args.p.is_some() {
                return Err(CliError::Input("--p and --primes apply only to the cyclotomic scheme".into()));
            }
            let phi = args.phi.as_deref().ok_or_else(|| CliError::Input("--phi is required for the general scheme".into()))?;
            let phi = ModulusPolynomial::new(parse_list(phi, "--phi")?)?;
            gen_secret_general(&phi, args.m.unwrap_or(2), &mut rng, args.coeff_bound)?
        }
    };
    let pk = gen_public(&sk)?;
    let failures = self_checks(&sk, &pk);
    if !failures.is_empty() {
        return Err(CliError::Math(format!("self-check failed: {}", failures.join("; "))));
    }
    let pf = PublicKeyFile::from_key(&pk);
    let fp = fingerprint(&pf);
    let sf = SecretKeyFile::from_key(&sk, fp.clone());
    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Io(format!("{}: {e}", args.out.display())))?;
    write_json(&args.out.join(SECRET_FILE), &sf)?;
    write_json(&args.out.join(PUBLIC_FILE), &pf)?;
    let mut msg = String::new();
    writeln!(msg, "seed: {seed}").unwrap();
    if let SchemeParams::Cyclotomic { p, primes } = sk.params() {
        writeln!(msg, "p: {p}, primes: {}", join(primes)).unwrap();
    }
    writeln!(msg, "moduli: {}", join(sk.moduli())).unwrap();
    writeln!(msg, "fingerprint: {fp}").unwrap();
    write!(msg, "wrote {} and {}", args.out.join(SECRET_FILE).display(), args.out.join(PUBLIC_FILE).display()).unwrap();
    Ok(msg)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Congruence and closed-form modulus checks; returns failure descriptions.
fn self_checks(sk: &SecretKey, pk: &PublicKey) -> Vec<String> {
    let mut failures = Vec::new();
    if sk.moduli() != pk.moduli() {
        failures.push("public moduli differ from the secret ideals".to_string());
    }
    if let Err(e) = check_crt_congruences(sk.ideals(), pk.crt_vectors()) {
        failures.push(e.to_string());
    }
    if let SchemeParams::Cyclotomic { p, primes } = sk.params() {
        let n = (*p - 1) as usize;
        for (q, ideal) in primes.iter().zip(sk.ideals()) {
            let ctx = ideal.context();
            let expected = cyclotomic_modulus(*q, n);
            if ideal.one_dim_modulus() != expected {
                failures.push(format!("t(I_{q}) = {} but the closed form gives {expected}", ideal.one_dim_modulus()));
            }
            let mut coords = vec![BigInt::from(0); n];
            coords[0] = BigInt::from(*q);
            coords[n - 1] += 1;
            let alpha = RingElement::new(ctx, coords).unwrap();
            if principal_ideal(&alpha).ok().as_ref() != Some(ideal) {
                failures.push(format!("ideal for q = {q} is not generated by x^(n-1) + q"));
            }
        }
    }
    failures
}

struct LoadedPublic {
    key: PublicKey,
    fingerprint: String,
}

fn load_public(path: &Path) -> Result<LoadedPublic, CliError> {
    let file: PublicKeyFile = read_json(path)?;
    let key = file.to_key()?;
    // recompute from the canonical re-serialization, not the raw bytes
    Ok(LoadedPublic { fingerprint: fingerprint(&PublicKeyFile::from_key(&key)), key })
}

fn load_secret(path: &Path) -> Result<(SecretKey, String), CliError> {
    let file: SecretKeyFile = read_json(path)?;
    Ok((file.to_key()?, file.fingerprint))
}

fn load_ciphertext(path: &Path) -> Result<(Ciphertext, String), CliError> {
    let file: CiphertextFile = read_json(path)?;
    Ok((file.to_ciphertext()?, file.fingerprint))
}

fn emit_ciphertext(c: &Ciphertext, fp: &str, out: Option<&Path>) -> Result<String, CliError> {
    let file = CiphertextFile::from_ciphertext(c, fp);
    match out {
        Some(path) => {
            write_json(path, &file)?;
            Ok(format!("wrote {}", path.display()))
        }
        None => Ok(serde_json::to_string_pretty(&file).expect("serializable")),
    }
}

fn encrypt(public: &Path, plaintext: &str, out: Option<&Path>) -> Result<String, CliError> {
    let pk = load_public(public)?;
    let residues = parse_list(plaintext, "plaintext")?;
    if residues.len() != pk.key.slots() {
        return Err(CliError::Input(format!("plaintext has {} residues, key has {} slots", residues.len(), pk.key.slots())));
    }
    let c = encrypt_residues(&pk.key, &residues)?;
    emit_ciphertext(&c, &pk.fingerprint, out)
}

fn decrypt(secret: &Path, ciphertext: &Path, mode: DecryptMode) -> Result<String, CliError> {
    let (sk, fp) = load_secret(secret)?;
    let (c, cfp) = load_ciphertext(ciphertext)?;
    if fp != cfp {
        return Err(CliError::Input("ciphertext fingerprint does not match the secret key".into()));
    }
    Ok(fhe::decrypt(&sk, &c, mode)?.to_string())
}

/// Loads ciphertexts that must share one key fingerprint and one ring context.
fn load_matching(paths: &[PathBuf]) -> Result<(Vec<Ciphertext>, String), CliError> {
    let mut cts: Vec<Ciphertext> = Vec::with_capacity(paths.len());
    let mut fp: Option<String> = None;
    for path in paths {
        let (c, cfp) = load_ciphertext(path)?;
        match &fp {
            Some(f) if *f != cfp => {
                return Err(CliError::Input(format!("{}: key fingerprint differs from the other inputs", path.display())))
            }
            _ => fp = Some(cfp),
        }
        if cts.first().is_some_and(|first| first.context() != c.context() || first.slots() != c.slots()) {
            return Err(CliError::Input(format!("{}: ring context differs from the other inputs", path.display())));
        }
        cts.push(c);
    }
    Ok((cts, fp.unwrap_or_default()))
}

fn binary(
    left: &Path,
    right: &Path,
    out: Option<&Path>,
    op: fn(&Ciphertext, &Ciphertext) -> crtfhe::Result<Ciphertext>,
) -> Result<String, CliError> {
    let (cts, fp) = load_matching(&[left.to_path_buf(), right.to_path_buf()])?;
    emit_ciphertext(&op(&cts[0], &cts[1])?, &fp, out)
}

fn eval(circuit: &Path, inputs: &[PathBuf], out: Option<&Path>) -> Result<String, CliError> {
    let text = std::fs::read_to_string(circuit).map_err(|e| CliError::Input(format!("{}: {e}", circuit.display())))?;
    let circuit: Circuit = text.parse()?;
    let (cts, fp) = load_matching(inputs)?;
    emit_ciphertext(&eval_circuit(&circuit, &cts)?, &fp, out)
}

fn matrix_string(rows: &[Vec<BigInt>]) -> String {
    let rows: Vec<String> = rows.iter().map(|r| format!("[{}]", join(r).replace(',', ", "))).collect();
    format!("[{}]", rows.join(", "))
}

fn inspect(path: &Path, as_json: bool) -> Result<String, CliError> {
    let (text, value) = match file_kind(path)? {
        FileKind::Secret => {
            let (sk, fp) = load_secret(path)?;
            let mut out = String::new();
            let ctx = sk.context();
            writeln!(out, "secret key, φ(x) = {ctx}, n = {}, m = {}", ctx.degree(), sk.slots()).unwrap();
            if let SchemeParams::Cyclotomic { p, primes } = sk.params() {
                writeln!(out, "cyclotomic: p = {p}, primes = {}", join(primes)).unwrap();
            }
            writeln!(out, "fingerprint: {fp}").unwrap();
            let mut slots = Vec::new();
            for (k, ideal) in sk.ideals().iter().enumerate() {
                let rows = ideal.hnf_basis().to_rows();
                let dims = ideal.gs_diagonal();
                writeln!(out, "slot {}:", k + 1).unwrap();
                if let Some(g) = ideal.generator() {
                    writeln!(out, "  generator: {g}").unwrap();
                }
                writeln!(out, "  HNF: {}", matrix_string(&rows)).unwrap();
                writeln!(out, "  t = {}", ideal.one_dim_modulus()).unwrap();
                writeln!(out, "  det = {}", ideal.determinant()).unwrap();
                writeln!(out, "  F(I) box: {}", dims.iter().map(ToString::to_string).collect::<Vec<_>>().join(" x ")).unwrap();
                slots.push(json!({
                    "generator": ideal.generator().map(|g| strs(g.coords())),
                    "hnf": rows.iter().map(|r| strs(r)).collect::<Vec<_>>(),
                    "t": ideal.one_dim_modulus().to_string(),
                    "determinant": ideal.determinant().to_string(),
                    "box": strs(&dims),
                }));
            }
            let value = json!({
                "kind": "secret", "phi": strs(ctx.phi_coeffs()), "n": ctx.degree(), "m": sk.slots(),
                "fingerprint": fp, "slots": slots,
            });
            (out, value)
        }
        FileKind::Public => {
            let pk = load_public(path)?;
            let ctx = pk.key.context();
            let mut out = String::new();
            writeln!(out, "public key, φ(x) = {ctx}, n = {}, m = {}", ctx.degree(), pk.key.slots()).unwrap();
            writeln!(out, "fingerprint: {}", pk.fingerprint).unwrap();
            writeln!(out, "moduli: {}", join(pk.key.moduli())).unwrap();
            for (k, a) in pk.key.crt_vectors().iter().enumerate() {
                writeln!(out, "A_{} = {a}", k + 1).unwrap();
            }
            let value = json!({
                "kind": "public", "phi": strs(ctx.phi_coeffs()), "n": ctx.degree(), "m": pk.key.slots(),
                "fingerprint": pk.fingerprint, "moduli": strs(pk.key.moduli()),
                "crt_vectors": pk.key.crt_vectors().iter().map(|a| strs(a.coords())).collect::<Vec<_>>(),
            });
            (out, value)
        }
        FileKind::Ciphertext => {
            let (c, fp) = load_ciphertext(path)?;
            let bits = c.body().coords().iter().map(|x| x.bits()).max().unwrap_or(0);
            let mut out = String::new();
            writeln!(out, "ciphertext, φ(x) = {}, n = {}, slots = {}", c.context(), c.context().degree(), c.slots()).unwrap();
            writeln!(out, "fingerprint: {fp}").unwrap();
            writeln!(out, "largest coordinate: {bits} bits").unwrap();
            let value = json!({
                "kind": "ciphertext", "n": c.context().degree(), "slots": c.slots(),
                "fingerprint": fp, "max_coordinate_bits": bits,
            });
            (out, value)
        }
    };
    if as_json {
        Ok(serde_json::to_string_pretty(&value).expect("serializable"))
    } else {
        Ok(text.trim_end().to_string())
    }
}

fn strs(v: &[BigInt]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn verify(secret: &Path, public: &Path) -> Result<String, CliError> {
    let (sk, fp) = load_secret(secret)?;
    let pk = load_public(public)?;
    let mut failures = Vec::new();
    if fp != pk.fingerprint {
        failures.push("public key fingerprint does not match the secret key".to_string());
    }
    if sk.context() != pk.key.context() || sk.slots() != pk.key.slots() {
        failures.push("keys use different rings or slot counts".to_string());
    } else {
        failures.extend(self_checks(&sk, &pk.key));
    }
    if failures.is_empty() {
        Ok(format!("ok: {} slots, congruences and moduli verified", sk.slots()))
    } else {
        Err(CliError::Math(format!("verification failed: {}", failures.join("; "))))
    }
}

fn rational_json(x: &BigRational) -> serde_json::Value {
    json!({ "exact": x.to_string(), "approx": x.to_f64() })
}

fn report(seed: Option<u64>, trials: usize, out: Option<&Path>) -> Result<String, CliError> {
    let seed = resolve_seed(seed);
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut summary = String::new();
    writeln!(summary, "seed: {seed}").unwrap();

    let mut norms = Vec::new();
    for p in [3u64, 5, 7, 11, 13] {
        let ctx: Context = Arc::new(ModulusPolynomial::cyclotomic(p)?);
        let k = norm_constants(&ctx);
        let s = norm_bound_trials(&ctx, trials, 100, &mut rng);
        writeln!(
            summary,
            "norm bound p={p:<2} n={:<2} W={} trials={} violations={} max ratio²={:.3e}",
            ctx.degree(),
            k.w_upper,
            s.trials,
            s.violations,
            s.max_ratio.to_f64().unwrap_or(f64::NAN)
        )
        .unwrap();
        norms.push(json!({
            "p": p, "n": ctx.degree(), "w_upper": k.w_upper.to_string(), "w_exact": k.exact,
            "trials": s.trials, "violations": s.violations, "max_ratio_squared": rational_json(&s.max_ratio),
        }));
    }

    let mut covering = Vec::new();
    let phi3: Context = Arc::new(ModulusPolynomial::cyclotomic(3)?);
    for gen in [[1i64, 0], [2, 1], [3, 1], [2, 0], [4, 1]] {
        let ideal = principal_ideal(&RingElement::from_i64(&phi3, &gen)?)?;
        let est = covering_radius_estimate(&ideal, 200, &mut rng)?;
        writeln!(summary, "covering radius² ≥ {est} for ⟨({}, {})⟩ (det {})", gen[0], gen[1], ideal.determinant()).unwrap();
        covering.push(json!({
            "generator": gen.iter().map(ToString::to_string).collect::<Vec<_>>(),
            "determinant": ideal.determinant().to_string(), "samples": 200,
            "lower_bound_squared": rational_json(&est),
        }));
    }

    let sk = secret_from_primes(3, &[2, 7])?;
    let pk = gen_public(&sk)?;
    let mut unique = 0;
    let mut total = 0;
    for a in 0..3 {
        for b in 0..43 {
            let u = vec![BigInt::from(a), BigInt::from(b)];
            let c = encrypt_residues(&pk, &u)?;
            let sols = brute_force_knapsack(&scheme_as_knapsack(&pk, c.body())?)?;
            total += 1;
            if sols == vec![u] {
                unique += 1;
            }
        }
    }
    writeln!(summary, "knapsack p=3 q=(2,7): {unique}/{total} plaintexts recovered uniquely by brute force").unwrap();

    let mut recovered = 0;
    let mut attempted = 0;
    for p in [3u64, 5, 7, 11, 13] {
        let sk = gen_secret_cyclotomic(p, 2, &mut rng, 100)?;
        let pk = gen_public(&sk)?;
        for _ in 0..10 {
            let u: Vec<BigInt> = pk.moduli().iter().map(|t| BigInt::from(rng.gen::<u64>()) % t).collect();
            let c = encrypt_residues(&pk, &u)?;
            attempted += 1;
            if public_decrypt(&pk, &c)?.is_some_and(|got| got.residues() == u.as_slice()) {
                recovered += 1;
            }
        }
    }
    writeln!(summary, "public-data decryption: {recovered}/{attempted} ciphertexts recovered without the secret key").unwrap();

    let value = json!({
        "version": crate::format::FORMAT_VERSION,
        "seed": seed.to_string(),
        "norm_bound": norms,
        "covering_radius": covering,
        "knapsack": { "p": 3, "primes": [2, 7], "search_space": "129", "plaintexts": total, "unique": unique },
        "public_decryption": { "ciphertexts": attempted, "recovered": recovered },
    });
    match out {
        Some(path) => {
            write_json(path, &value)?;
            writeln!(summary, "wrote {}", path.display()).unwrap();
            Ok(summary.trim_end().to_string())
        }
        None => Ok(format!("{}\n{}", summary.trim_end(), serde_json::to_string_pretty(&value).unwrap())),
    }
}
