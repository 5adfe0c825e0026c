//! Prompt templates. The bundled files are the defaults; a directory holding
//! `prove.txt` and `cot.txt` can replace them at run time.

use std::fs;
use std::io;
use std::path::Path;

pub const PROVE_TEMPLATE: &str = include_str!("../prompts/prove.txt");
pub const COT_TEMPLATE: &str = include_str!("../prompts/cot.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    pub prove: String,
    pub cot: String,
}

impl Default for Templates {
    fn default() -> Self {
        Templates { prove: PROVE_TEMPLATE.to_string(), cot: COT_TEMPLATE.to_string() }
    }
}

impl Templates {
    /// Reads `prove.txt` and `cot.txt` from `dir`; a missing file keeps the
    /// bundled default.
    pub fn load_dir(dir: &Path) -> io::Result<Templates> {
        let read = |name: &str, default: &str| match fs::read_to_string(dir.join(name)) {
            Ok(text) => Ok(text),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(default.to_string()),
            Err(e) => Err(e),
        };
        Ok(Templates { prove: read("prove.txt", PROVE_TEMPLATE)?, cot: read("cot.txt", COT_TEMPLATE)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_templates_carry_their_constraints() {
        assert!(PROVE_TEMPLATE.starts_with("You are an Isabelle proof expert"));
        assert!(COT_TEMPLATE.starts_with("You are analyzing a single proof step"));
        assert!(COT_TEMPLATE.contains("Do NOT simply restate or paraphrase"));
        assert!(COT_TEMPLATE.contains("Write ONE single concise paragraph"));
    }

    #[test]
    fn override_directory() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("prove.txt"), "custom").unwrap();
        let t = Templates::load_dir(dir.path()).unwrap();
        assert_eq!(t.prove, "custom");
        assert_eq!(t.cot, COT_TEMPLATE);
    }
}
