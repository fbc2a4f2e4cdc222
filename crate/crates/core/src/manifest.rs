//! Run manifests: `key TAB value` rows describing how an output was made.

use std::io::Write;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Manifest {
    rows: Vec<(String, String)>,
}

impl Manifest {
    /// A manifest opened with the tool version and the command name.
    pub fn new(command: &str) -> Manifest {
        let mut m = Manifest::default();
        m.push("version", env!("CARGO_PKG_VERSION"));
        m.push("command", command);
        m
    }

    /// Appends a row; tabs and newlines in either field become spaces.
    pub fn push(&mut self, key: impl AsRef<str>, value: impl ToString) {
        let clean = |s: &str| s.replace(['\t', '\n', '\r'], " ");
        self.rows.push((clean(key.as_ref()), clean(&value.to_string())));
    }

    pub fn rows(&self) -> &[(String, String)] {
        &self.rows
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.rows.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn write(&self, mut out: impl Write) -> std::io::Result<()> {
        for (k, v) in &self.rows {
            writeln!(out, "{k}\t{v}")?;
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("manifest is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_sanitized_and_ordered() {
        let mut m = Manifest::new("pipeline");
        m.push("flags", "--seed 7\t--out x");
        m.push("seed", 7);
        let text = m.to_tsv();
        assert!(text.starts_with("version\t"));
        assert!(text.contains("command\tpipeline\nflags\t--seed 7 --out x\nseed\t7\n"));
        assert_eq!(m.get("seed"), Some("7"));
    }
}
