//! The line-delimited dump format.
//!
//! ```text
//! #PAGE<TAB>article<TAB>Saadi
//! #INFOBOX<TAB>person
//! Saadi was a poet from [[Shiraz]].
//! #PAGE<TAB>redirect<TAB>Old Shiraz
//! #REDIRECT<TAB>Shiraz
//! #PAGE<TAB>disambiguation<TAB>Saadi
//! #DISAMBIG<TAB>Saadi
//! #DISAMBIG<TAB>Saadi Township
//! ```
//!
//! Directive lines must directly follow the `#PAGE` header. Body lines that
//! begin with `#` are written with a doubled `##`.

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PageKind {
    Article,
    Redirect,
    Disambiguation,
}

impl PageKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PageKind::Article => "article",
            PageKind::Redirect => "redirect",
            PageKind::Disambiguation => "disambiguation",
        }
    }
}

impl fmt::Display for PageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PageKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "article" => Ok(PageKind::Article),
            "redirect" => Ok(PageKind::Redirect),
            "disambiguation" => Ok(PageKind::Disambiguation),
            other => Err(format!("unknown page kind {other:?}")),
        }
    }
}

/// One page of a dump.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DumpRecord {
    pub title: String,
    pub kind: PageKind,
    pub infobox_type: Option<String>,
    pub redirect_target: Option<String>,
    pub disambig_targets: Vec<String>,
    /// Unescaped wiki markup. Empty for redirects.
    pub body: String,
}

impl DumpRecord {
    pub fn article(title: impl Into<String>, body: impl Into<String>) -> Self {
        DumpRecord {
            title: title.into(),
            kind: PageKind::Article,
            infobox_type: None,
            redirect_target: None,
            disambig_targets: Vec::new(),
            body: body.into(),
        }
    }

    pub fn redirect(title: impl Into<String>, target: impl Into<String>) -> Self {
        DumpRecord {
            title: title.into(),
            kind: PageKind::Redirect,
            infobox_type: None,
            redirect_target: Some(target.into()),
            disambig_targets: Vec::new(),
            body: String::new(),
        }
    }

    pub fn disambiguation<S: Into<String>>(
        title: impl Into<String>,
        targets: impl IntoIterator<Item = S>,
    ) -> Self {
        DumpRecord {
            title: title.into(),
            kind: PageKind::Disambiguation,
            infobox_type: None,
            redirect_target: None,
            disambig_targets: targets.into_iter().map(Into::into).collect(),
            body: String::new(),
        }
    }

    pub fn with_infobox(mut self, class: impl Into<String>) -> Self {
        self.infobox_type = Some(class.into());
        self
    }

    /// Check the per-record invariants.
    pub fn validate(&self) -> Result<()> {
        if self.title.trim().is_empty() {
            return Err(Error::Conflict("page with an empty title".into()));
        }
        match self.kind {
            PageKind::Redirect => {
                if self.redirect_target.is_none() {
                    return Err(Error::Conflict(format!(
                        "redirect {:?} has no target",
                        self.title
                    )));
                }
                if !self.body.trim().is_empty() {
                    return Err(Error::Conflict(format!(
                        "redirect {:?} has a non-empty body",
                        self.title
                    )));
                }
            }
            PageKind::Disambiguation => {
                if self.disambig_targets.is_empty() {
                    return Err(Error::Conflict(format!(
                        "disambiguation page {:?} lists no targets",
                        self.title
                    )));
                }
            }
            PageKind::Article => {}
        }
        if self.kind != PageKind::Redirect && self.redirect_target.is_some() {
            return Err(Error::Conflict(format!(
                "{} {:?} carries a redirect target",
                self.kind, self.title
            )));
        }
        if self.kind != PageKind::Disambiguation && !self.disambig_targets.is_empty() {
            return Err(Error::Conflict(format!(
                "{} {:?} carries disambiguation targets",
                self.kind, self.title
            )));
        }
        Ok(())
    }
}

/// Titles are unique per namespace: articles and redirects share one,
/// disambiguation pages have their own (an article and a disambiguation page
/// may both be called "Saadi").
pub(crate) fn check_unique_titles(records: &[DumpRecord]) -> Result<()> {
    let mut content = HashSet::new();
    let mut disambig = HashSet::new();
    for r in records {
        let seen = match r.kind {
            PageKind::Disambiguation => &mut disambig,
            _ => &mut content,
        };
        if !seen.insert(r.title.as_str()) {
            return Err(Error::Conflict(format!("duplicate title {:?}", r.title)));
        }
    }
    Ok(())
}

struct PageBuilder {
    line: usize,
    record: DumpRecord,
    body_lines: Vec<String>,
    in_body: bool,
}

impl PageBuilder {
    fn finish(mut self) -> Result<DumpRecord> {
        while self.body_lines.last().is_some_and(|l| l.trim().is_empty()) {
            self.body_lines.pop();
        }
        self.record.body = self.body_lines.join("\n");
        self.record.validate().map_err(|e| match e {
            Error::Conflict(msg) => Error::parse(self.line, msg),
            other => other,
        })?;
        Ok(self.record)
    }
}

fn field<'a>(line: &'a str, prefix: &str, lineno: usize) -> Result<&'a str> {
    let value = line[prefix.len()..].trim();
    if value.is_empty() {
        return Err(Error::parse(
            lineno,
            format!("{} without a value", prefix.trim()),
        ));
    }
    Ok(value)
}

/// Parse a dump from any buffered reader.
pub fn parse_dump<R: BufRead>(reader: R) -> Result<Vec<DumpRecord>> {
    let mut records = Vec::new();
    let mut current: Option<PageBuilder> = None;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);

        if let Some(rest) = line.strip_prefix("#PAGE\t") {
            if let Some(done) = current.take() {
                records.push(done.finish()?);
            }
            let (kind, title) = rest
                .split_once('\t')
                .ok_or_else(|| Error::parse(lineno, "header must be #PAGE<TAB>kind<TAB>title"))?;
            let kind: PageKind = kind.parse().map_err(|e: String| Error::parse(lineno, e))?;
            let title = title.trim();
            if title.is_empty() {
                return Err(Error::parse(lineno, "page title is empty"));
            }
            current = Some(PageBuilder {
                line: lineno,
                record: DumpRecord {
                    title: title.to_string(),
                    kind,
                    infobox_type: None,
                    redirect_target: None,
                    disambig_targets: Vec::new(),
                    body: String::new(),
                },
                body_lines: Vec::new(),
                in_body: false,
            });
            continue;
        }

        let Some(page) = current.as_mut() else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::parse(
                lineno,
                "content before the first #PAGE header",
            ));
        };

        if let Some(escaped) = line.strip_prefix("##") {
            page.in_body = true;
            page.body_lines.push(format!("#{escaped}"));
            continue;
        }
        if !line.starts_with('#') {
            page.in_body = true;
            page.body_lines.push(line.to_string());
            continue;
        }
        if page.in_body {
            return Err(Error::parse(
                lineno,
                "directive after body text (escape a literal '#' as '##')",
            ));
        }

        let rec = &mut page.record;
        if line.starts_with("#INFOBOX\t") {
            if rec.infobox_type.is_some() {
                return Err(Error::parse(lineno, "repeated #INFOBOX"));
            }
            rec.infobox_type = Some(field(line, "#INFOBOX\t", lineno)?.to_string());
        } else if line.starts_with("#REDIRECT\t") {
            if rec.kind != PageKind::Redirect {
                return Err(Error::parse(
                    lineno,
                    format!("#REDIRECT on a {} page", rec.kind),
                ));
            }
            if rec.redirect_target.is_some() {
                return Err(Error::parse(lineno, "repeated #REDIRECT"));
            }
            rec.redirect_target = Some(field(line, "#REDIRECT\t", lineno)?.to_string());
        } else if line.starts_with("#DISAMBIG\t") {
            if rec.kind != PageKind::Disambiguation {
                return Err(Error::parse(
                    lineno,
                    format!("#DISAMBIG on a {} page", rec.kind),
                ));
            }
            rec.disambig_targets
                .push(field(line, "#DISAMBIG\t", lineno)?.to_string());
        } else {
            return Err(Error::parse(
                lineno,
                format!("unknown record header {line:?}"),
            ));
        }
    }
    if let Some(done) = current.take() {
        records.push(done.finish()?);
    }

    check_unique_titles(&records)?;
    Ok(records)
}

pub fn parse_dump_str(s: &str) -> Result<Vec<DumpRecord>> {
    parse_dump(s.as_bytes())
}

/// Serialize records back into the dump format.
pub fn write_dump(records: &[DumpRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&format!("#PAGE\t{}\t{}\n", r.kind, r.title));
        if let Some(t) = &r.infobox_type {
            out.push_str(&format!("#INFOBOX\t{t}\n"));
        }
        if let Some(t) = &r.redirect_target {
            out.push_str(&format!("#REDIRECT\t{t}\n"));
        }
        for t in &r.disambig_targets {
            out.push_str(&format!("#DISAMBIG\t{t}\n"));
        }
        if !r.body.is_empty() {
            for line in r.body.split('\n') {
                if line.starts_with('#') {
                    out.push('#');
                }
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    out
}
