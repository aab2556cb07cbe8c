use serde::{Deserialize, Serialize};

use super::ValidatorError;
use crate::remark::RemarkSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RecordFormat {
    ClangYaml,
    IntelText,
}

/// How to drive one compiler. Command templates are argv lists; flags are
/// inserted right after the program name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompilerProfile {
    pub name: String,
    pub compiler: RemarkSource,
    /// Syntax-only check of `{src}`.
    pub lint_cmd: Vec<String>,
    /// Object compile of `{src}` into `{out}`.
    pub compile_cmd: Vec<String>,
    /// Executable build of `{src}` into `{out}`.
    pub link_cmd: Vec<String>,
    /// Flags that write the optimization record to `{record}`.
    pub record_flag: Vec<String>,
    pub record_format: RecordFormat,
    pub vector_flags: Vec<String>,
    pub scalar_flags: Vec<String>,
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

impl CompilerProfile {
    pub fn clang() -> Self {
        CompilerProfile {
            name: "clang".into(),
            compiler: RemarkSource::Clang,
            lint_cmd: strings(&["clang", "-fsyntax-only", "{src}"]),
            compile_cmd: strings(&["clang", "-c", "{src}", "-o", "{out}"]),
            link_cmd: strings(&["clang", "{src}", "-o", "{out}", "-lm"]),
            record_flag: strings(&["-fsave-optimization-record", "-foptimization-record-file={record}"]),
            record_format: RecordFormat::ClangYaml,
            vector_flags: strings(&["-O3"]),
            scalar_flags: strings(&["-O3", "-fno-vectorize", "-fno-slp-vectorize"]),
        }
    }

    /// Defaults for Intel oneAPI `icx`; flags are an assumption, override via config.
    pub fn intel() -> Self {
        CompilerProfile {
            name: "intel".into(),
            compiler: RemarkSource::Intel,
            lint_cmd: strings(&["icx", "-fsyntax-only", "{src}"]),
            compile_cmd: strings(&["icx", "-c", "{src}", "-o", "{out}"]),
            link_cmd: strings(&["icx", "{src}", "-o", "{out}", "-lm"]),
            record_flag: strings(&["-qopt-report=3", "-qopt-report-phase=vec", "-qopt-report-file={record}"]),
            record_format: RecordFormat::IntelText,
            vector_flags: strings(&["-O3"]),
            scalar_flags: strings(&["-O3", "-fno-vectorize"]),
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "clang" => Some(Self::clang()),
            "intel" | "icx" => Some(Self::intel()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ValidatorError> {
        let needs = [
            ("lint_cmd", &self.lint_cmd, &["{src}"][..]),
            ("compile_cmd", &self.compile_cmd, &["{src}", "{out}"][..]),
            ("link_cmd", &self.link_cmd, &["{src}", "{out}"][..]),
            ("record_flag", &self.record_flag, &["{record}"][..]),
        ];
        for (field, argv, placeholders) in needs {
            if field != "record_flag" && argv.is_empty() {
                return Err(ValidatorError::InvalidProfile(format!("{}: {field} is empty", self.name)));
            }
            for p in placeholders {
                if !argv.iter().any(|a| a.contains(p)) {
                    return Err(ValidatorError::InvalidProfile(format!("{}: {field} lacks {p}", self.name)));
                }
            }
        }
        Ok(())
    }

    /// The program name, i.e. the first word of the compile command.
    pub fn program(&self) -> &str {
        self.compile_cmd.first().map(String::as_str).unwrap_or("")
    }
}

/// Substitute placeholders and splice `flags` in after argv[0].
pub(crate) fn expand(template: &[String], flags: &[String], vars: &[(&str, &str)]) -> Vec<String> {
    let subst = |s: &String| vars.iter().fold(s.clone(), |acc, (k, v)| acc.replace(k, v));
    let mut argv: Vec<String> = template.iter().take(1).map(subst).collect();
    argv.extend(flags.iter().map(subst));
    argv.extend(template.iter().skip(1).map(subst));
    argv
}
