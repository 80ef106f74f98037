//! Experiment-record CSV, fitted-law JSON documents, and the record-level
//! pipelines behind the command-line tool.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{fit_joint_law, fit_power_law, FitPoint, JointObservation};
use crate::frontier::{estimate_omega0, extract_non_dominated, inverse_normalize, knee_point, NormalizedPoint, PerfPoint};
use crate::scaling::{DataSize, JointLaw, Loss, ModelSize, PowerLaw};

pub const RECORD_COLUMNS: [&str; 6] = [
    "strategy",
    "model_size",
    "data_size",
    "ce_effectiveness",
    "ce_ood",
    "ce_adversarial",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub strategy: String,
    pub model_size: ModelSize,
    pub data_size: DataSize,
    pub ce_effectiveness: Loss,
    pub ce_ood: Loss,
    pub ce_adversarial: Option<Loss>,
}

impl ExperimentRecord {
    /// Mean of the OOD and adversarial CE; the OOD CE alone when the
    /// adversarial cell is empty.
    pub fn robustness(&self) -> Loss {
        match self.ce_adversarial {
            Some(a) => mean_loss(self.ce_ood, a),
            None => self.ce_ood,
        }
    }

    pub fn aspect(&self, aspect: Aspect) -> Result<Loss> {
        match aspect {
            Aspect::Effectiveness => Ok(self.ce_effectiveness),
            Aspect::Ood => Ok(self.ce_ood),
            Aspect::Robustness => Ok(self.robustness()),
            Aspect::Adversarial => self.ce_adversarial.ok_or_else(|| {
                Error::domain(format!(
                    "record {}/{}/{} has no adversarial CE",
                    self.strategy,
                    self.model_size.get(),
                    self.data_size.get()
                ))
            }),
        }
    }

    pub fn label(&self) -> String {
        format!("{}/m{}/d{}", self.strategy, self.model_size.get(), self.data_size.get())
    }
}

fn mean_loss(a: Loss, b: Loss) -> Loss {
    Loss::new(0.5 * (a.value() + b.value())).expect("mean of two losses is a loss")
}

fn parse_error(line: u64, column: &str, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column: column.to_string(),
        message: message.into(),
    }
}

/// Reads records from CSV text with the [`RECORD_COLUMNS`] header, in any
/// column order. Errors carry the 1-based line number and column name.
pub fn parse_records<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let headers = rdr.headers()?.clone();
    let mut pos = [0usize; 6];
    for (k, name) in RECORD_COLUMNS.iter().enumerate() {
        pos[k] = headers
            .iter()
            .position(|h| h == *name)
            .ok_or_else(|| parse_error(1, name, "missing header column"))?;
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let cell = |k: usize| row.get(pos[k]).unwrap_or("");
        let size = |k: usize| -> Result<u64> {
            let c = cell(k);
            let v: i128 = c
                .parse()
                .map_err(|_| parse_error(line, RECORD_COLUMNS[k], format!("`{c}` is not an integer")))?;
            if v < 1 {
                return Err(parse_error(line, RECORD_COLUMNS[k], format!("size must be positive, got {v}")));
            }
            u64::try_from(v).map_err(|_| parse_error(line, RECORD_COLUMNS[k], "size too large"))
        };
        let loss = |k: usize| -> Result<Loss> {
            let c = cell(k);
            let v: f64 = c
                .parse()
                .map_err(|_| parse_error(line, RECORD_COLUMNS[k], format!("`{c}` is not a number")))?;
            if !(v.is_finite() && v > 0.0) {
                return Err(parse_error(line, RECORD_COLUMNS[k], format!("loss must be positive, got {c}")));
            }
            Loss::new(v)
        };
        let strategy = cell(0);
        if strategy.is_empty() {
            return Err(parse_error(line, "strategy", "empty strategy"));
        }
        out.push(ExperimentRecord {
            strategy: strategy.to_string(),
            model_size: ModelSize::new(size(1)?)?,
            data_size: DataSize::new(size(2)?)?,
            ce_effectiveness: loss(3)?,
            ce_ood: loss(4)?,
            ce_adversarial: if cell(5).is_empty() { None } else { Some(loss(5)?) },
        });
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<ExperimentRecord>> {
    parse_records(fs::File::open(path)?)
}

/// Writes records as CSV, with the header when `header` is set. Numbers use
/// the shortest representation that parses back to the same value.
pub fn write_records<W: Write>(out: W, records: &[ExperimentRecord], header: bool) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    if header {
        w.write_record(RECORD_COLUMNS)?;
    }
    for r in records {
        w.write_record([
            r.strategy.clone(),
            r.model_size.get().to_string(),
            r.data_size.get().to_string(),
            r.ce_effectiveness.value().to_string(),
            r.ce_ood.value().to_string(),
            r.ce_adversarial.map(|l| l.value().to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Appends records to a CSV file, creating it with a header if it is missing
/// or empty. The file is rewritten atomically.
pub fn append_records(path: &Path, records: &[ExperimentRecord]) -> Result<()> {
    let mut existing = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    if !existing.is_empty() {
        parse_records(existing.as_slice())?;
        if !existing.ends_with(b"\n") {
            existing.push(b'\n');
        }
    }
    let header = existing.is_empty();
    write_records(&mut existing, records, header)?;
    write_atomic(path, &existing)
}

/// Writes to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::domain(format!("`{}` is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

macro_rules! text_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name { $($variant),+ }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl std::str::FromStr for $name {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant),)+
                    _ => Err(Error::Schema(format!(concat!("unknown ", stringify!($name), " `{}`"), s))),
                }
            }
        }

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

text_enum!(LawKind { Power => "power", Joint => "joint" });
text_enum!(Variable { Model => "model", Data => "data", Joint => "joint" });
text_enum!(Aspect {
    Effectiveness => "effectiveness",
    Ood => "ood",
    Adversarial => "adversarial",
    Robustness => "robustness",
});

const POWER_NAMES: [&str; 3] = ["exponent", "offset", "scale"];
const JOINT_NAMES: [&str; 5] = ["data_exponent", "data_scale", "model_exponent", "model_scale", "offset"];
const DOCUMENT_KEYS: [&str; 6] = ["kind", "variable", "aspect", "coefficients", "r_squared", "provenance"];

/// A fitted law with enough context to reuse it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LawDocument {
    pub kind: LawKind,
    pub variable: Variable,
    pub aspect: Aspect,
    pub coefficients: BTreeMap<String, f64>,
    pub r_squared: Option<f64>,
    pub provenance: String,
}

impl LawDocument {
    pub fn from_power_law(law: &PowerLaw, variable: Variable, aspect: Aspect, r_squared: Option<f64>, provenance: &str) -> Result<Self> {
        if variable == Variable::Joint {
            return Err(Error::Schema("a power law needs variable model or data".into()));
        }
        let coefficients = [("scale", law.scale()), ("exponent", law.exponent()), ("offset", law.offset())]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect();
        Ok(LawDocument {
            kind: LawKind::Power,
            variable,
            aspect,
            coefficients,
            r_squared: r_squared.filter(|r| r.is_finite()),
            provenance: provenance.to_string(),
        })
    }

    pub fn from_joint_law(law: &JointLaw, aspect: Aspect, r_squared: Option<f64>, provenance: &str) -> Self {
        let coefficients = [
            ("model_scale", law.model_scale()),
            ("data_scale", law.data_scale()),
            ("model_exponent", law.model_exponent()),
            ("data_exponent", law.data_exponent()),
            ("offset", law.offset()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        LawDocument {
            kind: LawKind::Joint,
            variable: Variable::Joint,
            aspect,
            coefficients,
            r_squared: r_squared.filter(|r| r.is_finite()),
            provenance: provenance.to_string(),
        }
    }

    fn validate(&self) -> Result<()> {
        let names: Vec<&str> = self.coefficients.keys().map(String::as_str).collect();
        let (expected, variable_ok): (&[&str], bool) = match self.kind {
            LawKind::Power => (&POWER_NAMES, self.variable != Variable::Joint),
            LawKind::Joint => (&JOINT_NAMES, self.variable == Variable::Joint),
        };
        if names != expected {
            return Err(Error::Schema(format!(
                "{} law needs coefficients {expected:?}, found {names:?}",
                self.kind
            )));
        }
        if !variable_ok {
            return Err(Error::Schema(format!("{} law cannot have variable {}", self.kind, self.variable)));
        }
        Ok(())
    }

    fn coef(&self, name: &str) -> f64 {
        self.coefficients[name]
    }

    pub fn power_law(&self) -> Result<PowerLaw> {
        self.validate()?;
        if self.kind != LawKind::Power {
            return Err(Error::Schema("expected a power law document".into()));
        }
        PowerLaw::new(self.coef("scale"), self.coef("exponent"), self.coef("offset"))
    }

    pub fn joint_law(&self) -> Result<JointLaw> {
        self.validate()?;
        if self.kind != LawKind::Joint {
            return Err(Error::Schema("expected a joint law document".into()));
        }
        JointLaw::new(
            self.coef("model_scale"),
            self.coef("data_scale"),
            self.coef("model_exponent"),
            self.coef("data_exponent"),
            self.coef("offset"),
        )
    }

    /// Pretty JSON with a fixed key order and exactly round-tripping numbers.
    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Parses a document; unknown top-level keys are ignored and reported
    /// as warnings.
    pub fn from_json(text: &str) -> Result<(Self, Vec<String>)> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Schema("law document must be a JSON object".into()))?;
        let mut known = serde_json::Map::new();
        let mut warnings = Vec::new();
        for (k, v) in obj {
            if DOCUMENT_KEYS.contains(&k.as_str()) {
                known.insert(k.clone(), v.clone());
            } else {
                warnings.push(format!("ignoring unknown key `{k}`"));
            }
        }
        for (field, parse) in [
            ("kind", (|s: &str| s.parse::<LawKind>().map(|_| ())) as fn(&str) -> Result<()>),
            ("variable", |s| s.parse::<Variable>().map(|_| ())),
            ("aspect", |s| s.parse::<Aspect>().map(|_| ())),
        ] {
            match known.get(field).and_then(|v| v.as_str()) {
                Some(s) => parse(s)?,
                None => return Err(Error::Schema(format!("missing or non-string `{field}`"))),
            }
        }
        let doc: LawDocument =
            serde_json::from_value(serde_json::Value::Object(known)).map_err(|e| Error::Schema(e.to_string()))?;
        doc.validate()?;
        Ok((doc, warnings))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_json()?.as_bytes())
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<String>)> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Fits a law of `variable` to one aspect of the records.
///
/// Model-size fits use the records at the largest data size, and data-size
/// fits those at the largest model size. Repeated (model, data) cells are
/// averaged before fitting.
pub fn fit_records(
    records: &[ExperimentRecord],
    variable: Variable,
    aspect: Aspect,
    strategy: Option<&str>,
    provenance: &str,
) -> Result<LawDocument> {
    let selected: Vec<&ExperimentRecord> = records
        .iter()
        .filter(|r| strategy.is_none_or(|s| r.strategy == s))
        .collect();
    if selected.is_empty() {
        return Err(Error::InsufficientData("no records match".into()));
    }
    let mut cells: BTreeMap<(u64, u64), (f64, usize)> = BTreeMap::new();
    for r in &selected {
        let e = cells.entry((r.model_size.get(), r.data_size.get())).or_insert((0.0, 0));
        e.0 += r.aspect(aspect)?.value();
        e.1 += 1;
    }
    let cells: Vec<(u64, u64, f64)> = cells.into_iter().map(|((m, d), (s, n))| (m, d, s / n as f64)).collect();
    match variable {
        Variable::Joint => {
            let obs = cells
                .iter()
                .map(|&(m, d, l)| JointObservation::new(m as f64, d as f64, l))
                .collect::<Result<Vec<_>>>()?;
            let rep = fit_joint_law(&obs)?;
            Ok(LawDocument::from_joint_law(&rep.law, aspect, Some(rep.r_squared), provenance))
        }
        Variable::Model | Variable::Data => {
            let by_model = variable == Variable::Model;
            let fixed = cells
                .iter()
                .map(|c| if by_model { c.1 } else { c.0 })
                .max()
                .expect("cells are non-empty");
            let points = cells
                .iter()
                .filter(|c| (if by_model { c.1 } else { c.0 }) == fixed)
                .map(|&(m, d, l)| FitPoint::new(if by_model { m } else { d } as f64, l))
                .collect::<Result<Vec<_>>>()?;
            let rep = fit_power_law(&points, None)?;
            LawDocument::from_power_law(&rep.law, variable, aspect, Some(rep.r_squared), provenance)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportPoint {
    pub label: String,
    pub robustness: f64,
    pub effectiveness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrontierReport {
    pub frontier: Vec<ReportPoint>,
    pub knee: ReportPoint,
    pub omega0: f64,
    pub omega0_unclamped: f64,
}

fn perf_points(records: &[ExperimentRecord]) -> Result<Vec<PerfPoint>> {
    records
        .iter()
        .map(|r| PerfPoint::new(r.robustness().value(), r.ce_effectiveness.value(), r.label()))
        .collect()
}

/// Non-dominated records in (robustness, effectiveness) CE, their knee, and
/// the initial Pareto weight it implies.
pub fn frontier_report(records: &[ExperimentRecord]) -> Result<FrontierReport> {
    let points = perf_points(records)?;
    let frontier = extract_non_dominated(&points)?;
    let knee = knee_point(&frontier)?;
    let w = estimate_omega0(&frontier)?;
    let rp = |p: &PerfPoint| ReportPoint {
        label: p.label.clone(),
        robustness: p.robustness.value(),
        effectiveness: p.effectiveness.value(),
    };
    Ok(FrontierReport {
        frontier: frontier.points().iter().map(rp).collect(),
        knee: rp(knee),
        omega0: w.omega0,
        omega0_unclamped: w.ratio,
    })
}

/// Every record as a normalized score pair, higher is better.
pub fn normalized_series(records: &[ExperimentRecord]) -> Result<Vec<NormalizedPoint>> {
    inverse_normalize(&perf_points(records)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "strategy,model_size,data_size,ce_effectiveness,ce_ood,ce_adversarial\n";

    #[test]
    fn parses_rows() {
        assert!(parse_records(HEADER.as_bytes()).unwrap().is_empty());
        let text = format!("{HEADER}standard,82000000,480000,0.34,0.51,0.77\npareto,1,2,0.5,0.6,\n");
        let recs = parse_records(text.as_bytes()).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].strategy, "standard");
        assert_eq!(recs[0].model_size.get(), 82_000_000);
        assert_eq!(recs[0].data_size.get(), 480_000);
        assert_eq!(recs[0].ce_adversarial.unwrap().value(), 0.77);
        assert_eq!(recs[1].ce_adversarial, None);
        assert_eq!(recs[1].robustness().value(), 0.6);
        assert!((recs[0].robustness().value() - 0.64).abs() < 1e-15);
    }

    #[test]
    fn reordered_columns_accepted() {
        let text = "ce_ood,strategy,data_size,model_size,ce_adversarial,ce_effectiveness\n0.5,s,10,20,,0.4\n";
        let r = &parse_records(text.as_bytes()).unwrap()[0];
        assert_eq!((r.model_size.get(), r.data_size.get()), (20, 10));
    }

    fn err_at(text: &str) -> (u64, String) {
        match parse_records(text.as_bytes()) {
            Err(Error::Parse { line, column, .. }) => (line, column),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn line_numbered_errors() {
        let ok = "standard,1,1,0.5,0.5,0.5\n";
        assert_eq!(err_at(&format!("{HEADER}{ok}standard,-5,1,0.5,0.5,\n")), (3, "model_size".into()));
        assert_eq!(err_at(&format!("{HEADER}standard,5,0,0.5,0.5,\n")), (2, "data_size".into()));
        assert_eq!(err_at(&format!("{HEADER}{ok}{ok}s,5,5,abc,0.5,\n")), (4, "ce_effectiveness".into()));
        assert_eq!(err_at(&format!("{HEADER}s,5,5,0.5,0,\n")), (2, "ce_ood".into()));
        assert_eq!(err_at(&format!("{HEADER},5,5,0.5,0.5,\n")), (2, "strategy".into()));
        assert_eq!(err_at("strategy,model_size,data_size,ce_effectiveness,ce_ood\n"), (1, "ce_adversarial".into()));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let text = format!("{HEADER}a,3,4,0.1234567890123456789,2.5e-7,\nb,5,6,1e-300,0.30000000000000004,7\n");
        let recs = parse_records(text.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_records(&mut out, &recs, true).unwrap();
        assert_eq!(parse_records(out.as_slice()).unwrap(), recs);
    }

    fn scratch_dir(name: &str) -> std::path::PathBuf {
        let d = std::env::temp_dir().join(format!("drscale-io-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn append_creates_then_extends() {
        let dir = scratch_dir("append");
        let path = dir.join("runs.csv");
        let text = format!("{HEADER}a,3,4,0.5,0.6,0.7\n");
        let recs = parse_records(text.as_bytes()).unwrap();
        append_records(&path, &recs).unwrap();
        append_records(&path, &recs).unwrap();
        let back = read_records(&path).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(fs::read_to_string(&path).unwrap().matches("strategy").count(), 1);
        fs::remove_dir_all(dir).unwrap();
    }

    fn ood_doc() -> LawDocument {
        let law = PowerLaw::new(3.70e4, 0.55, 0.05).unwrap();
        LawDocument::from_power_law(&law, Variable::Model, Aspect::Ood, Some(0.9987), "marco").unwrap()
    }

    #[test]
    fn law_document_round_trip() {
        let doc = ood_doc();
        let json = doc.to_json().unwrap();
        let (back, warnings) = LawDocument::from_json(&json).unwrap();
        assert_eq!(back, doc);
        assert!(warnings.is_empty());
        assert_eq!(back.power_law().unwrap(), PowerLaw::new(3.70e4, 0.55, 0.05).unwrap());
        let keys: Vec<usize> = ["\"kind\"", "\"variable\"", "\"aspect\"", "\"coefficients\"", "\"r_squared\"", "\"provenance\""]
            .iter()
            .map(|k| json.find(k).unwrap())
            .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));

        let joint = JointLaw::new(3.47e4, 2.14e3, 0.38, 1.10, 0.04).unwrap();
        let jd = LawDocument::from_joint_law(&joint, Aspect::Effectiveness, None, "");
        let (back, _) = LawDocument::from_json(&jd.to_json().unwrap()).unwrap();
        assert_eq!(back.joint_law().unwrap(), joint);
    }

    #[test]
    fn law_document_schema_errors() {
        let json = ood_doc().to_json().unwrap();
        let bad_kind = json.replace("\"power\"", "\"cubic\"");
        assert!(matches!(LawDocument::from_json(&bad_kind), Err(Error::Schema(_))));
        let bad_aspect = json.replace("\"ood\"", "\"speed\"");
        assert!(matches!(LawDocument::from_json(&bad_aspect), Err(Error::Schema(_))));
        let bad_names = json.replace("\"scale\"", "\"model_scale\"");
        assert!(matches!(LawDocument::from_json(&bad_names), Err(Error::Schema(_))));
        let bad_variable = json.replace("\"model\"", "\"joint\"");
        assert!(matches!(LawDocument::from_json(&bad_variable), Err(Error::Schema(_))));

        let extra = json.replacen('{', "{\n  \"note\": \"hand edited\",", 1);
        let (doc, warnings) = LawDocument::from_json(&extra).unwrap();
        assert_eq!(doc, ood_doc());
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn fit_records_slices_and_averages() {
        let law = PowerLaw::new(4.34e3, 0.83, 0.08).unwrap();
        let mut text = HEADER.to_string();
        for d in [3e4, 6e4, 1.2e5, 2.4e5, 4.8e5] {
            let l = law.predict(d);
            text += &format!("standard,100,{d},{l},{l},{l}\n");
            // A smaller model must not leak into the data-size slice.
            text += &format!("standard,10,{d},{},{l},\n", 2.0 * l);
            text += &format!("other,100,{d},9,9,9\n");
        }
        let recs = parse_records(text.as_bytes()).unwrap();
        let doc = fit_records(&recs, Variable::Data, Aspect::Effectiveness, Some("standard"), "t").unwrap();
        let fit = doc.power_law().unwrap();
        assert!((fit.scale() / 4.34e3 - 1.0).abs() < 0.01);
        assert!((fit.exponent() / 0.83 - 1.0).abs() < 0.01);
        assert!((fit.offset() / 0.08 - 1.0).abs() < 0.01);
        assert!(fit_records(&recs, Variable::Data, Aspect::Adversarial, None, "t").is_err());
        assert!(matches!(
            fit_records(&recs, Variable::Data, Aspect::Ood, Some("none"), "t"),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn frontier_report_from_records() {
        let text = format!("{HEADER}a,1,1,1.0,3.0,3.0\nb,1,1,1.2,1.2,1.2\nc,1,1,3.0,1.0,1.0\nd,1,1,3.0,3.0,3.0\n");
        let recs = parse_records(text.as_bytes()).unwrap();
        let rep = frontier_report(&recs).unwrap();
        assert_eq!(rep.frontier.len(), 3);
        assert_eq!(rep.knee.label, "b/m1/d1");
        assert_eq!(rep.omega0, 0.99);
        assert!((rep.omega0_unclamped - 1.0).abs() < 1e-15);
        let series = normalized_series(&recs).unwrap();
        assert_eq!(series.len(), 4);
        assert_eq!((series[3].x, series[3].y), (0.0, 0.0));
    }
}
