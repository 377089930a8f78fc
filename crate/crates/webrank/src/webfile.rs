//! Plain-text input format for webs.
//!
//! A web file starts with a header line `vars: x, y, z` naming the
//! coordinates, followed by one first integral per line, written over those
//! variables. Blank lines are skipped and `#` starts a comment that runs to
//! the end of the line.

use std::path::Path;

use thiserror::Error;

use crate::expr::{parse_expression, ParseError};
use crate::web::{WebError, WebSpec};

/// Failure modes of reading a web file.
#[derive(Debug, Error)]
pub enum WebFileError {
    #[error("could not read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected a header `vars: x, y, ...` before any integral")]
    MissingHeader { line: usize },
    #[error("the header declares no variables")]
    NoVariables,
    #[error("duplicate variable name `{name}` in the header")]
    DuplicateVariable { name: String },
    #[error("line {line}: {source}")]
    Expression {
        line: usize,
        #[source]
        source: ParseError,
    },
    #[error(transparent)]
    Web(#[from] WebError),
}

/// Parses web-file text into a validated [`WebSpec`].
pub fn parse_web_source(text: &str) -> Result<WebSpec, WebFileError> {
    let mut variables: Option<Vec<String>> = None;
    let mut integrals = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        match &variables {
            None => {
                let Some(rest) = content.strip_prefix("vars:") else {
                    return Err(WebFileError::MissingHeader { line });
                };
                let names: Vec<String> = rest
                    .split(',')
                    .map(|name| name.trim().to_string())
                    .filter(|name| !name.is_empty())
                    .collect();
                if names.is_empty() {
                    return Err(WebFileError::NoVariables);
                }
                for (i, name) in names.iter().enumerate() {
                    if names[..i].contains(name) {
                        return Err(WebFileError::DuplicateVariable { name: name.clone() });
                    }
                }
                variables = Some(names);
            }
            Some(names) => {
                let expr = parse_expression(content, names)
                    .map_err(|source| WebFileError::Expression { line, source })?;
                integrals.push(expr);
            }
        }
    }
    let Some(names) = variables else {
        return Err(WebFileError::MissingHeader {
            line: text.lines().count() + 1,
        });
    };
    Ok(WebSpec::new(names, integrals)?)
}

/// Reads and parses a web file from disk.
pub fn load_web_file(path: &Path) -> Result<WebSpec, WebFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| WebFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_web_source(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_simple_file() {
        let web = parse_web_source("vars: x, y\nx\ny\nx+y\n").unwrap();
        assert_eq!(web.n(), 2);
        assert_eq!(web.d(), 3);
        assert_eq!(web.variables(), ["x", "y"]);
    }

    #[test]
    fn skips_comments_and_blank_lines() {
        let text = "# a three-web\n\nvars: x, y  # coordinates\n\nx # first\ny\nx+y\n";
        let web = parse_web_source(text).unwrap();
        assert_eq!(web.d(), 3);
    }

    #[test]
    fn header_must_come_first() {
        let err = parse_web_source("x+y\nvars: x, y\n").unwrap_err();
        assert!(matches!(err, WebFileError::MissingHeader { line: 1 }));
    }

    #[test]
    fn reports_expression_errors_with_line_numbers() {
        let err = parse_web_source("vars: x, y\nx\ny\nx +* y\n").unwrap_err();
        assert!(matches!(err, WebFileError::Expression { line: 4, .. }));
    }

    #[test]
    fn rejects_undeclared_names_with_line_numbers() {
        let err = parse_web_source("vars: x, y\nx\ny\nx+w\n").unwrap_err();
        assert!(matches!(err, WebFileError::Expression { line: 4, .. }));
    }

    #[test]
    fn rejects_too_few_integrals() {
        let err = parse_web_source("vars: x, y\nx\ny\n").unwrap_err();
        assert!(matches!(err, WebFileError::Web(_)));
    }

    #[test]
    fn rejects_duplicate_variables() {
        let err = parse_web_source("vars: x, x\nx\nx\nx\n").unwrap_err();
        assert!(matches!(err, WebFileError::DuplicateVariable { .. }));
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_web_file(Path::new("/nonexistent/w.web")).unwrap_err();
        assert!(matches!(err, WebFileError::Io { .. }));
    }
}
