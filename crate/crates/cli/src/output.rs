//! Staged output: every file is rendered in memory first, then written
//! through temporary files and renamed into place only once all of them
//! exist.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

#[derive(Debug, Default)]
pub struct OutputSet {
    files: Vec<(String, String)>,
}

impl OutputSet {
    pub fn add(&mut self, name: impl Into<String>, contents: String) {
        self.files.push((name.into(), contents));
    }

    /// A CSV plus its companion gnuplot script.
    pub fn add_csv(&mut self, name: &str, contents: String, plot: PlotSpec<'_>) {
        let script = plot.render(name);
        let stem = name.strip_suffix(".csv").unwrap_or(name);
        self.add(name, contents);
        self.add(format!("{stem}.gp"), script);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(n, _)| n.as_str())
    }

    /// Writes every file or none of them.
    pub fn commit(self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut staged = Vec::with_capacity(self.files.len());
        for (name, contents) in &self.files {
            let mut tmp = NamedTempFile::new_in(dir)?;
            tmp.write_all(contents.as_bytes())?;
            tmp.as_file().sync_all()?;
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::with_capacity(staged.len());
        for (tmp, target) in staged {
            tmp.persist(&target).map_err(|e| e.error)?;
            written.push(target);
        }
        Ok(written)
    }
}

/// What a plot script should draw from a CSV with a header row.
pub struct PlotSpec<'a> {
    pub title: &'a str,
    pub xlabel: &'a str,
    pub ylabel: &'a str,
    /// `(x column, y column, legend)`, 1-based columns.
    pub series: &'a [(usize, usize, &'a str)],
}

impl PlotSpec<'_> {
    fn render(&self, csv: &str) -> String {
        let mut s = String::new();
        s.push_str("set datafile separator ','\n");
        s.push_str(&format!("set title '{}'\n", self.title));
        s.push_str(&format!("set xlabel '{}'\n", self.xlabel));
        s.push_str(&format!("set ylabel '{}'\n", self.ylabel));
        s.push_str("set grid\n");
        let parts: Vec<String> = self
            .series
            .iter()
            .map(|(x, y, label)| {
                format!("'{csv}' every ::1 using {x}:{y} with lines title '{label}'")
            })
            .collect();
        s.push_str(&format!("plot {}\n", parts.join(", \\\n     ")));
        s.push_str("pause -1\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_writes_all_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputSet::default();
        out.add_csv(
            "a.csv",
            "x,y\n1,2\n".into(),
            PlotSpec {
                title: "t",
                xlabel: "x",
                ylabel: "y",
                series: &[(1, 2, "y")],
            },
        );
        let names: Vec<&str> = out.names().collect();
        assert_eq!(names, ["a.csv", "a.gp"]);
        out.commit(dir.path()).unwrap();
        assert_eq!(
            fs::read_to_string(dir.path().join("a.csv")).unwrap(),
            "x,y\n1,2\n"
        );
        let gp = fs::read_to_string(dir.path().join("a.gp")).unwrap();
        assert!(gp.contains("'a.csv' every ::1 using 1:2"));
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
    }
}
