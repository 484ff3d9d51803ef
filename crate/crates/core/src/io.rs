//! Plain-text file formats.
//!
//! - Challenge files: one challenge per line as space-separated ±1 integers
//!   (the trailing +1 included), with an optional `# n=<stages>` header.
//! - CRP files: a challenge line, a tab, then the ±1 response.
//! - Model files: the stage count, then each weight, then the bias, one
//!   value per line; weights are printed with enough digits to round-trip
//!   f64 exactly.
//! - Trace CSVs: `replica,crp_count,k,learner,noise_p,test_accuracy`.
//!
//! Readers report malformed input with the file and line number.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::challenge::{Challenge, CrpSet};
use crate::error::{Error, Result};
use crate::experiment::{CheckpointSummary, ExperimentResult};
use crate::model::LinearModel;
use crate::puf::ArbiterPuf;

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn challenge_line(challenge: &Challenge) -> String {
    let tokens: Vec<&str> = challenge
        .bits()
        .iter()
        .map(|&b| if b > 0 { "+1" } else { "-1" })
        .collect();
    tokens.join(" ")
}

fn parse_challenge_tokens(path: &Path, line_no: usize, text: &str) -> Result<Challenge> {
    let bits: Vec<i8> = text
        .split_whitespace()
        .map(|tok| {
            tok.parse::<i8>()
                .map_err(|_| parse_error(path, line_no, format!("bad coordinate {tok:?}")))
        })
        .collect::<Result<_>>()?;
    Challenge::new(bits).map_err(|e| parse_error(path, line_no, e.to_string()))
}

pub fn write_challenges(path: &Path, challenges: &[Challenge]) -> Result<()> {
    if challenges.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut out = create(path)?;
    writeln!(out, "# n={}", challenges[0].n())?;
    for c in challenges {
        writeln!(out, "{}", challenge_line(c))?;
    }
    Ok(())
}

pub fn read_challenges(path: &Path) -> Result<Vec<Challenge>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let challenge = parse_challenge_tokens(path, idx + 1, text)?;
        if let Some(first) = out.first() {
            let first: &Challenge = first;
            if challenge.n() != first.n() {
                return Err(parse_error(
                    path,
                    idx + 1,
                    format!(
                        "challenge has {} stages but the file started with {}",
                        challenge.n(),
                        first.n()
                    ),
                ));
            }
        }
        out.push(challenge);
    }
    if out.is_empty() {
        return Err(parse_error(path, 1, "no challenges in file"));
    }
    Ok(out)
}

pub fn write_crps(path: &Path, set: &CrpSet) -> Result<()> {
    if set.is_empty() {
        return Err(Error::EmptyData);
    }
    let mut out = create(path)?;
    writeln!(out, "# n={}", set.n())?;
    for (challenge, response) in set.iter() {
        writeln!(
            out,
            "{}\t{}",
            challenge_line(challenge),
            if response > 0 { "+1" } else { "-1" }
        )?;
    }
    Ok(())
}

pub fn read_crps(path: &Path) -> Result<CrpSet> {
    let reader = BufReader::new(File::open(path)?);
    let mut pairs: Vec<(Challenge, i8)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let (challenge_part, response_part) = text
            .rsplit_once('\t')
            .ok_or_else(|| parse_error(path, idx + 1, "missing tab before the response"))?;
        let challenge = parse_challenge_tokens(path, idx + 1, challenge_part)?;
        let response: i8 = response_part
            .trim()
            .parse()
            .map_err(|_| parse_error(path, idx + 1, format!("bad response {response_part:?}")))?;
        if response != 1 && response != -1 {
            return Err(parse_error(
                path,
                idx + 1,
                format!("response must be +1 or -1, got {response}"),
            ));
        }
        pairs.push((challenge, response));
    }
    let n = match pairs.first() {
        Some((c, _)) => c.n(),
        None => return Err(parse_error(path, 1, "no challenge-response pairs in file")),
    };
    CrpSet::from_pairs(n, pairs).map_err(|e| match e {
        Error::DimensionMismatch { .. } => {
            parse_error(path, 1, "challenges in file have differing stage counts")
        }
        other => other,
    })
}

/// Writes a hyperplane (stage count, weights, bias) so it reloads exactly.
pub fn write_model(path: &Path, model: &LinearModel) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "{}", model.n())?;
    for w in model.weights() {
        writeln!(out, "{w:.17e}")?;
    }
    writeln!(out, "{:.17e}", model.bias())?;
    Ok(())
}

pub fn read_model(path: &Path) -> Result<LinearModel> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let text = line.trim().to_string();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        lines.push((idx + 1, text));
    }
    if lines.is_empty() {
        return Err(parse_error(path, 1, "empty model file"));
    }
    let n: usize = lines[0].1.parse().map_err(|_| {
        parse_error(
            path,
            lines[0].0,
            format!("bad stage count {:?}", lines[0].1),
        )
    })?;
    if lines.len() != n + 3 {
        return Err(parse_error(
            path,
            lines[0].0,
            format!(
                "expected {} value lines for n={n} (weights plus bias), found {}",
                n + 2,
                lines.len() - 1
            ),
        ));
    }
    let mut values = Vec::with_capacity(n + 2);
    for (line_no, text) in &lines[1..] {
        let v: f64 = text
            .parse()
            .map_err(|_| parse_error(path, *line_no, format!("bad number {text:?}")))?;
        values.push(v);
    }
    let bias = values.pop().expect("counted above");
    LinearModel::new(values, bias)
}

/// Saves a chain's delay weights in the model format (bias is zero).
pub fn write_puf(path: &Path, puf: &ArbiterPuf) -> Result<()> {
    write_model(path, &puf.to_model())
}

pub fn read_puf(path: &Path) -> Result<ArbiterPuf> {
    let model = read_model(path)?;
    if model.bias() != 0.0 {
        return Err(parse_error(
            path,
            1,
            "a chain file must have a zero bias line",
        ));
    }
    ArbiterPuf::from_weights(model.weights().to_vec())
}

/// Per-replica learning curves in long CSV form.
pub fn write_trace_csv(path: &Path, result: &ExperimentResult) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "replica,crp_count,k,learner,noise_p,test_accuracy")?;
    let spec = &result.spec;
    let k_field = match spec.mode {
        crate::experiment::Mode::Active => format!("{}", spec.k),
        _ => String::new(),
    };
    for (replica, row) in result.replica_accuracy.iter().enumerate() {
        for (i, accuracy) in row.iter().enumerate() {
            writeln!(
                out,
                "{replica},{},{k_field},{},{},{accuracy:.6}",
                spec.checkpoints[i],
                spec.learner.as_str(),
                spec.noise_p,
            )?;
        }
    }
    Ok(())
}

/// Aggregated curve: one row per checkpoint.
pub fn write_summary_csv(path: &Path, summary: &[CheckpointSummary]) -> Result<()> {
    let mut out = create(path)?;
    writeln!(out, "crp_count,mean_accuracy,std_error")?;
    for point in summary {
        writeln!(
            out,
            "{},{:.6},{:.6}",
            point.crp_count, point.mean_accuracy, point.std_error
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::synth::random_challenges;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join("puflab-io-tests");
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn challenges_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let challenges = random_challenges(16, 20, &mut rng).unwrap();
        let path = tmp("challenges.txt");
        write_challenges(&path, &challenges).unwrap();
        let back = read_challenges(&path).unwrap();
        assert_eq!(challenges, back);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("# n=16\n"));
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .split(' ')
            .all(|t| t == "+1" || t == "-1"));
    }

    #[test]
    fn crps_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let puf = crate::puf::ArbiterPuf::sample(12, 1.0, &mut rng).unwrap();
        let mut set = CrpSet::new(12).unwrap();
        for c in random_challenges(12, 15, &mut rng).unwrap() {
            let r = puf.respond(&c, &mut rng).unwrap();
            set.push(c, r).unwrap();
        }
        let path = tmp("pairs.crp");
        write_crps(&path, &set).unwrap();
        assert_eq!(read_crps(&path).unwrap(), set);
    }

    #[test]
    fn model_round_trips_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let puf = crate::puf::ArbiterPuf::sample(24, 1.0, &mut rng).unwrap();
        let model = LinearModel::new(puf.weights().to_vec(), -0.12345678901234567).unwrap();
        let path = tmp("model.txt");
        write_model(&path, &model).unwrap();
        let back = read_model(&path).unwrap();
        assert_eq!(model.weights(), back.weights());
        assert_eq!(model.bias(), back.bias());
    }

    #[test]
    fn puf_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let puf = crate::puf::ArbiterPuf::sample(8, 1.0, &mut rng).unwrap();
        let path = tmp("chain.txt");
        write_puf(&path, &puf).unwrap();
        let back = read_puf(&path).unwrap();
        assert_eq!(puf.weights(), back.weights());
    }

    #[test]
    fn malformed_lines_name_the_line() {
        let path = tmp("bad_challenges.txt");
        fs::write(&path, "# n=2\n+1 -1 +1\n+1 broken +1\n").unwrap();
        match read_challenges(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected a parse error, got {other:?}"),
        }

        let path = tmp("bad_pairs.crp");
        fs::write(&path, "+1 -1 +1\t+1\n+1 -1 +1 +1\n").unwrap();
        match read_crps(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }

        let path = tmp("bad_response.crp");
        fs::write(&path, "+1 -1 +1\t3\n").unwrap();
        match read_crps(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected a parse error, got {other:?}"),
        }

        let path = tmp("mixed_n.txt");
        fs::write(&path, "+1 -1 +1\n+1 -1 +1 +1\n").unwrap();
        match read_challenges(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected a parse error, got {other:?}"),
        }

        let path = tmp("bad_model.txt");
        fs::write(&path, "2\n0.5\n1.5\n").unwrap();
        assert!(read_model(&path).is_err());
    }

    #[test]
    fn trace_csv_shape() {
        use crate::experiment::{run_experiment, ExperimentSpec, Mode};
        let mut spec = ExperimentSpec::active_base("csv-test");
        spec.n = 8;
        spec.mode = Mode::PassiveRandom;
        spec.checkpoints = vec![5, 10];
        spec.replicas = 2;
        spec.eval_size = 20;
        let result = run_experiment(&spec).unwrap();
        let path = tmp("trace.csv");
        write_trace_csv(&path, &result).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "replica,crp_count,k,learner,noise_p,test_accuracy"
        );
        assert_eq!(lines.len(), 1 + 2 * 2);
        // Passive runs leave the k column empty.
        assert!(lines[1].starts_with("0,5,,svm,0,"));

        let path2 = tmp("summary.csv");
        write_summary_csv(&path2, &result.summary).unwrap();
        let text2 = fs::read_to_string(&path2).unwrap();
        assert!(text2.starts_with("crp_count,mean_accuracy,std_error\n"));
        assert_eq!(text2.lines().count(), 3);
    }
}
