use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// Finished without reaching the GMRES tolerance.
    Warn,
    Error,
}

impl CellStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Warn => "warn",
            CellStatus::Error => "error",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "ok" => Some(CellStatus::Ok),
            "warn" => Some(CellStatus::Warn),
            "error" => Some(CellStatus::Error),
            _ => None,
        }
    }

    pub fn from_converged(converged: bool) -> Self {
        if converged {
            CellStatus::Ok
        } else {
            CellStatus::Warn
        }
    }
}

struct State {
    // Rows per cell key, in first-seen order.
    keys: Vec<String>,
    rows: HashMap<String, Vec<Vec<String>>>,
}

/// A CSV table whose leading `key_cols` columns identify a cell, and whose
/// `status` column records the outcome. A cell may own several rows.
pub struct ResumableTable {
    path: PathBuf,
    header: Vec<String>,
    key_cols: usize,
    status_col: usize,
    state: Mutex<State>,
}

impl ResumableTable {
    /// Opens `path`, loading any rows it already holds. A file with a
    /// different header is an error rather than being overwritten.
    pub fn open(path: impl AsRef<Path>, header: &[&str], key_cols: usize) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let status_col = header
            .iter()
            .position(|h| *h == "status")
            .expect("table header has a status column");
        let mut state = State {
            keys: Vec::new(),
            rows: HashMap::new(),
        };
        if path.exists() {
            let mut rdr = csv::Reader::from_path(&path)
                .map_err(|e| Error::io(&path, std::io::Error::other(e.to_string())))?;
            let found: Vec<String> = rdr
                .headers()
                .map_err(|e| Error::io(&path, std::io::Error::other(e.to_string())))?
                .iter()
                .map(String::from)
                .collect();
            if found != header {
                return Err(Error::Data(format!(
                    "{} has header {:?}, expected {:?}",
                    path.display(),
                    found,
                    header
                )));
            }
            for rec in rdr.records() {
                let rec = rec.map_err(|e| Error::io(&path, std::io::Error::other(e.to_string())))?;
                let row: Vec<String> = rec.iter().map(String::from).collect();
                let key = row[..key_cols].join(",");
                if !state.rows.contains_key(&key) {
                    state.keys.push(key.clone());
                }
                state.rows.entry(key).or_default().push(row);
            }
        }
        Ok(ResumableTable {
            path,
            header: header.iter().map(|s| s.to_string()).collect(),
            key_cols,
            status_col,
            state: Mutex::new(state),
        })
    }

    pub fn key_of(&self, row: &[String]) -> String {
        row[..self.key_cols].join(",")
    }

    /// Stored rows of a cell if all of them finished (ok or warn).
    pub fn completed(&self, key: &str) -> Option<Vec<Vec<String>>> {
        let st = self.state.lock().expect("table lock");
        let rows = st.rows.get(key)?;
        let done = !rows.is_empty()
            && rows.iter().all(|r| {
                matches!(
                    CellStatus::parse(&r[self.status_col]),
                    Some(CellStatus::Ok | CellStatus::Warn)
                )
            });
        done.then(|| rows.clone())
    }

    /// Replaces the rows of `key` and rewrites the file.
    pub fn record(&self, key: &str, rows: Vec<Vec<String>>) -> Result<()> {
        let mut st = self.state.lock().expect("table lock");
        if !st.rows.contains_key(key) {
            st.keys.push(key.to_string());
        }
        st.rows.insert(key.to_string(), rows);
        self.write(&st)
    }

    fn write(&self, st: &State) -> Result<()> {
        if let Some(dir) = self.path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
        }
        let tmp = self.path.with_extension("csv.tmp");
        {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_path(&tmp)
                .map_err(|e| Error::io(&tmp, std::io::Error::other(e.to_string())))?;
            let err = |e: csv::Error| Error::io(&tmp, std::io::Error::other(e.to_string()));
            w.write_record(&self.header).map_err(err)?;
            for k in &st.keys {
                for r in &st.rows[k] {
                    w.write_record(r).map_err(err)?;
                }
            }
            w.flush().map_err(|e| Error::io(&tmp, e))?;
        }
        fs::rename(&tmp, &self.path).map_err(|e| Error::io(&self.path, e))
    }

    /// Whether any stored row has status `error`.
    pub fn any_error(&self) -> bool {
        let st = self.state.lock().expect("table lock");
        st.rows
            .values()
            .flatten()
            .any(|r| r[self.status_col] == CellStatus::Error.as_str())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}
