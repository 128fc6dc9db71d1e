//! Group catalog files and the bundled catalog.
//!
//! Two formats are accepted, both allowing `#` comments and blank lines:
//!
//! ```text
//! perm <n> [label]            table <m> [label]
//! (1 2 3)                     0 1 2 ...
//! (1 2)(3 4)                  1 0 ...
//! ```
//!
//! A permutation file lists one generator per line in cycle notation. A
//! table file lists `m` rows of `m` indices, 0 being the identity.

use std::path::Path;

use crate::error::{Error, Result};
use crate::groups::{perm_group, symmetric_group, table_group, Caps, FiniteGroup, Perm};

macro_rules! bundled {
    ($($label:literal => $file:literal),* $(,)?) => {
        &[$(($label, include_str!(concat!("../catalog/", $file)))),*]
    };
}

/// Bundled catalog entries, by label.
static BUNDLED: &[(&str, &str)] = bundled! {
    "Z1" => "Z1.tbl",
    "Z2" => "Z2.tbl",
    "Z3" => "Z3.tbl",
    "Z4" => "Z4.tbl",
    "Z2xZ2" => "Z2xZ2.tbl",
    "Z5" => "Z5.tbl",
    "Z6" => "Z6.tbl",
    "Z7" => "Z7.tbl",
    "Z8" => "Z8.tbl",
    "Z4xZ2" => "Z4xZ2.tbl",
    "Z2^3" => "Z2e3.tbl",
    "D4" => "D4.tbl",
    "Q8" => "Q8.tbl",
    "Z9" => "Z9.tbl",
    "Z3xZ3" => "Z3xZ3.tbl",
    "Z10" => "Z10.tbl",
    "Z11" => "Z11.tbl",
    "Z12" => "Z12.tbl",
    "Z6xZ2" => "Z6xZ2.tbl",
    "Z13" => "Z13.tbl",
    "Z14" => "Z14.tbl",
    "Z15" => "Z15.tbl",
    "Z16" => "Z16.tbl",
    "Z4xZ4" => "Z4xZ4.tbl",
    "Z4xZ2:Z2" => "Z4xZ2sZ2.tbl",
    "Z4:Z4" => "Z4sZ4.tbl",
    "Z8xZ2" => "Z8xZ2.tbl",
    "M16" => "M16.tbl",
    "Dih16" => "Dih16.tbl",
    "SD16" => "SD16.tbl",
    "Q16" => "Q16.tbl",
    "Z4xZ2xZ2" => "Z4xZ2xZ2.tbl",
    "D4xZ2" => "D4xZ2.tbl",
    "Q8xZ2" => "Q8xZ2.tbl",
    "Pauli" => "Pauli.tbl",
    "Z2^4" => "Z2e4.tbl",
    "A4" => "A4.perm",
};

/// Every nilpotent group of order at most 16, one per isomorphism type.
pub const NILPOTENT_16: &[&str] = &[
    "Z1", "Z2", "Z3", "Z4", "Z2xZ2", "Z5", "Z6", "Z7", "Z8", "Z4xZ2", "Z2^3", "D4", "Q8", "Z9", "Z3xZ3",
    "Z10", "Z11", "Z12", "Z6xZ2", "Z13", "Z14", "Z15", "Z16", "Z4xZ4", "Z4xZ2:Z2", "Z4:Z4", "Z8xZ2",
    "M16", "Dih16", "SD16", "Q16", "Z4xZ2xZ2", "D4xZ2", "Q8xZ2", "Pauli", "Z2^4",
];

/// Name of the catalog set expanding to [`NILPOTENT_16`].
pub const NILPOTENT_16_SET: &str = "@nilpotent16";

pub fn bundled_labels() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(l, _)| *l)
}

/// A bundled group by label, or `S<n>` for a symmetric group.
pub fn builtin(name: &str) -> Result<FiniteGroup> {
    if let Some(n) = name.strip_prefix('S').and_then(|s| s.parse::<usize>().ok()) {
        return symmetric_group(n);
    }
    let text = BUNDLED
        .iter()
        .find(|(l, _)| *l == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| Error::Malformed(format!("unknown group {name:?}")))?;
    parse_group(text, Caps::default())
}

/// Resolves a catalog reference: `@nilpotent16`, a builtin name, or a file path.
pub fn resolve(reference: &str, caps: Caps) -> Result<Vec<FiniteGroup>> {
    if reference == NILPOTENT_16_SET {
        return NILPOTENT_16.iter().map(|l| builtin(l)).collect();
    }
    match builtin(reference) {
        Ok(g) => Ok(vec![g]),
        Err(_) if Path::new(reference).exists() => Ok(vec![load_group(Path::new(reference), caps)?]),
        Err(e) => Err(e),
    }
}

pub fn load_group(path: &Path, caps: Caps) -> Result<FiniteGroup> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let g = parse_group(&text, caps)?;
    if g.label().starts_with("perm") || g.label().starts_with("table") {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("group");
        return Ok(g.with_label(stem));
    }
    Ok(g)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

/// Parses either catalog format.
pub fn parse_group(text: &str, caps: Caps) -> Result<FiniteGroup> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty group file".into() })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let size: usize = fields
        .get(1)
        .and_then(|s| s.parse().ok())
        .ok_or(Error::Parse { line: hline, msg: format!("bad header {header:?}") })?;
    match fields[0] {
        "perm" => {
            let gens = lines
                .map(|(ln, l)| Perm::parse_cycles(l, size).map_err(|e| Error::Parse { line: ln, msg: e.to_string() }))
                .collect::<Result<Vec<_>>>()?;
            let label = fields.get(2).map_or_else(|| format!("perm{size}"), |s| s.to_string());
            Ok(perm_group(size, &gens, caps.perm_closure)?.with_label(label))
        }
        "table" => {
            let label = fields.get(2).map_or_else(|| format!("table{size}"), |s| s.to_string());
            if size > caps.table_order {
                return Err(Error::SizeLimit { what: format!("table order {size}"), cap: caps.table_order });
            }
            let mut rows = Vec::with_capacity(size);
            for (ln, l) in lines {
                let row = l
                    .split_whitespace()
                    .map(|s| s.parse::<usize>().map_err(|_| Error::Parse { line: ln, msg: format!("bad entry {s:?}") }))
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
            if rows.len() != size {
                return Err(Error::Parse {
                    line: hline,
                    msg: format!("expected {size} rows, found {}", rows.len()),
                });
            }
            table_group(&rows, &label, caps.table_order)
        }
        other => Err(Error::Parse { line: hline, msg: format!("unknown group format {other:?}") }),
    }
}

/// Serialises a group in table format.
pub fn to_table_text(g: &FiniteGroup) -> String {
    let mut s = format!("table {} {}\n", g.order(), g.label().replace(' ', "_"));
    for row in g.table_rows() {
        let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        s.push_str(&r.join(" "));
        s.push('\n');
    }
    s
}
