//! The `.cms` instance file format.
//!
//! Line-oriented text. The first meaningful line is `machines <M>`; after
//! it come part blocks: a `part <k>` line (parts numbered 1, 2, ... in
//! order) followed by one `route <m1> <m2> ...` line per candidate route
//! of that part, listing the machines the route visits (1-based).
//! Everything from `#` to the end of a line is a comment; blank lines are
//! ignored. Route serial numbers are implicit: routes count up globally
//! in file order, so the third `route` line in the file is route 3.
//!
//! ```text
//! # two parts sharing machine 2
//! machines 3
//! part 1
//! route 1 2
//! part 2
//! route 2 3
//! ```

use cellform::{validate_instance, Instance, ModelError, RawInstance};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut machine_count: Option<usize> = None;
    let mut part_routes: Vec<Vec<usize>> = Vec::new();
    let mut incidence: Vec<Vec<bool>> = Vec::new();

    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let keyword = words.next().expect("non-empty line has a first word");
        match keyword {
            "machines" => {
                if machine_count.is_some() {
                    return Err(syntax(line, "repeated machines line"));
                }
                if !part_routes.is_empty() {
                    return Err(syntax(line, "machines line must come first"));
                }
                let count = parse_number(&mut words, line, "machines")?;
                finish_line(words, line)?;
                machine_count = Some(count);
            }
            "part" => {
                if machine_count.is_none() {
                    return Err(syntax(line, "part before the machines line"));
                }
                let serial = parse_number(&mut words, line, "part")?;
                finish_line(words, line)?;
                if serial != part_routes.len() + 1 {
                    return Err(syntax(
                        line,
                        format!("expected part {}, found part {serial}", part_routes.len() + 1),
                    ));
                }
                part_routes.push(Vec::new());
            }
            "route" => {
                let Some(machines) = machine_count else {
                    return Err(syntax(line, "route before the machines line"));
                };
                let Some(current) = part_routes.last_mut() else {
                    return Err(syntax(line, "route before any part"));
                };
                let mut row = vec![false; machines];
                let mut any = false;
                for word in words {
                    let m: usize = word
                        .parse()
                        .map_err(|_| syntax(line, format!("bad machine index '{word}'")))?;
                    if m == 0 || m > machines {
                        return Err(syntax(
                            line,
                            format!("machine {m} outside 1..={machines}"),
                        ));
                    }
                    if row[m - 1] {
                        return Err(syntax(line, format!("machine {m} listed twice")));
                    }
                    row[m - 1] = true;
                    any = true;
                }
                if !any {
                    return Err(syntax(line, "route lists no machines"));
                }
                incidence.push(row);
                current.push(incidence.len());
            }
            other => {
                return Err(syntax(line, format!("unknown keyword '{other}'")));
            }
        }
    }

    let Some(machine_count) = machine_count else {
        return Err(syntax(text.lines().count() + 1, "missing machines line"));
    };
    Ok(validate_instance(RawInstance {
        machine_count,
        part_routes,
        incidence,
    })?)
}

fn parse_number(
    words: &mut std::str::SplitWhitespace<'_>,
    line: usize,
    keyword: &str,
) -> Result<usize, ParseError> {
    let word = words
        .next()
        .ok_or_else(|| syntax(line, format!("{keyword} needs a number")))?;
    word.parse()
        .map_err(|_| syntax(line, format!("bad number '{word}' after {keyword}")))
}

fn finish_line(
    mut words: std::str::SplitWhitespace<'_>,
    line: usize,
) -> Result<(), ParseError> {
    match words.next() {
        None => Ok(()),
        Some(extra) => Err(syntax(line, format!("unexpected '{extra}'"))),
    }
}

/// Writes an instance back out in canonical form: no comments, machines
/// ascending on each route line. `parse_instance` inverts it exactly.
pub fn format_instance(instance: &Instance) -> String {
    let mut out = format!("machines {}\n", instance.machine_count());
    for part in instance.parts() {
        out += &format!("part {part}\n");
        for &route in instance.routes_of(part) {
            let machines: Vec<String> = instance
                .machines_of(route)
                .iter()
                .map(ToString::to_string)
                .collect();
            out += &format!("route {}\n", machines.join(" "));
        }
    }
    out
}
