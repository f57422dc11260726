use log::warn;

use super::units::parse_value;
use super::{
    Capacitor, Circuit, IndependentSource, Mosfet, NetlistError, Polarity, Ports, Pulse,
    SourceKind, MIN_FEATURE_WIDTH,
};

/// Non-fatal finding produced while parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: Option<usize>,
    pub message: String,
}

#[derive(Debug, Clone)]
struct Token {
    text: String,
    line: usize,
    column: usize,
}

#[derive(Debug)]
struct LogicalLine {
    tokens: Vec<Token>,
    line: usize,
}

fn syntax(tok: &Token, message: impl Into<String>) -> NetlistError {
    NetlistError::Syntax {
        line: tok.line,
        column: tok.column,
        message: message.into(),
    }
}

fn tokenize_into(out: &mut Vec<Token>, text: &str, line: usize, col_offset: usize) {
    let mut current: Option<(usize, String)> = None;
    for (col, ch) in text.chars().enumerate() {
        let col = col + col_offset + 1;
        if ch.is_whitespace() || ch == '(' || ch == ')' {
            if let Some((c, t)) = current.take() {
                out.push(Token {
                    text: t,
                    line,
                    column: c,
                });
            }
            if ch != ' ' && !ch.is_whitespace() {
                out.push(Token {
                    text: ch.to_string(),
                    line,
                    column: col,
                });
            }
        } else {
            current.get_or_insert_with(|| (col, String::new())).1.push(ch);
        }
    }
    if let Some((c, t)) = current {
        out.push(Token {
            text: t,
            line,
            column: c,
        });
    }
}

fn logical_lines(text: &str) -> Vec<LogicalLine> {
    let mut lines: Vec<LogicalLine> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split(';').next().unwrap_or("");
        let trimmed = body.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('*') {
            continue;
        }
        let lead = body.len() - trimmed.len();
        if let Some(rest) = trimmed.strip_prefix('+') {
            if let Some(prev) = lines.last_mut() {
                tokenize_into(&mut prev.tokens, rest, line, lead + 1);
                continue;
            }
        }
        let mut tokens = Vec::new();
        tokenize_into(&mut tokens, trimmed, line, lead);
        lines.push(LogicalLine { tokens, line });
    }
    lines
}

fn number(tok: &Token) -> Result<f64, NetlistError> {
    parse_value(&tok.text).ok_or_else(|| syntax(tok, format!("invalid number '{}'", tok.text)))
}

fn expect<'a>(
    tokens: &'a [Token],
    idx: usize,
    what: &str,
    line: &LogicalLine,
) -> Result<&'a Token, NetlistError> {
    tokens.get(idx).ok_or_else(|| {
        let last = line.tokens.last().expect("logical lines are non-empty");
        NetlistError::Syntax {
            line: last.line,
            column: last.column + last.text.chars().count(),
            message: format!("expected {what}"),
        }
    })
}

fn net(tok: &Token) -> Result<String, NetlistError> {
    if tok.text == "(" || tok.text == ")" || tok.text.contains('=') {
        return Err(syntax(tok, format!("expected a net name, found '{}'", tok.text)));
    }
    Ok(tok.text.clone())
}

fn parse_mosfet(line: &LogicalLine) -> Result<Mosfet, NetlistError> {
    let t = &line.tokens;
    let name = t[0].text.clone();
    let drain = net(expect(t, 1, "drain net", line)?)?;
    let gate = net(expect(t, 2, "gate net", line)?)?;
    let source = net(expect(t, 3, "source net", line)?)?;
    let bulk = net(expect(t, 4, "bulk net", line)?)?;
    let model = expect(t, 5, "NMOS or PMOS", line)?;
    let polarity = match model.text.to_ascii_uppercase().as_str() {
        "NMOS" => Polarity::Nmos,
        "PMOS" => Polarity::Pmos,
        other => return Err(syntax(model, format!("unknown model '{other}'"))),
    };
    let mut width = None;
    let mut length = None;
    for tok in &t[6..] {
        let Some((key, value)) = tok.text.split_once('=') else {
            return Err(syntax(tok, format!("expected W=<val> or L=<val>, found '{}'", tok.text)));
        };
        let value = parse_value(value)
            .ok_or_else(|| syntax(tok, format!("invalid number '{value}'")))?;
        let slot = match key.to_ascii_uppercase().as_str() {
            "W" => &mut width,
            "L" => &mut length,
            _ => return Err(syntax(tok, format!("unknown parameter '{key}'"))),
        };
        if slot.replace(value).is_some() {
            return Err(syntax(tok, format!("parameter '{key}' given twice")));
        }
    }
    let (Some(width), Some(length)) = (width, length) else {
        return Err(syntax(&t[0], "MOSFET needs both W= and L="));
    };
    Ok(Mosfet {
        name,
        polarity,
        drain,
        gate,
        source,
        bulk,
        width,
        length,
    })
}

fn parse_capacitor(line: &LogicalLine) -> Result<Capacitor, NetlistError> {
    let t = &line.tokens;
    let positive = net(expect(t, 1, "positive net", line)?)?;
    let negative = net(expect(t, 2, "negative net", line)?)?;
    let value = number(expect(t, 3, "capacitance", line)?)?;
    if let Some(extra) = t.get(4) {
        return Err(syntax(extra, "unexpected token after capacitance"));
    }
    Ok(Capacitor {
        name: t[0].text.clone(),
        positive,
        negative,
        value,
    })
}

fn parse_source(line: &LogicalLine) -> Result<IndependentSource, NetlistError> {
    let t = &line.tokens;
    let positive = net(expect(t, 1, "positive net", line)?)?;
    let negative = net(expect(t, 2, "negative net", line)?)?;
    let kind_tok = expect(t, 3, "DC or PULSE", line)?;
    let (kind, consumed) = match kind_tok.text.to_ascii_uppercase().as_str() {
        "DC" => (SourceKind::Dc(number(expect(t, 4, "DC value", line)?)?), 5),
        "PULSE" => {
            let open = expect(t, 4, "'('", line)?;
            if open.text != "(" {
                return Err(syntax(open, "expected '(' after PULSE"));
            }
            let mut fields = [0.0; 7];
            for (i, f) in fields.iter_mut().enumerate() {
                let tok = expect(t, 5 + i, "PULSE field", line)?;
                if tok.text == ")" {
                    return Err(syntax(tok, "PULSE needs 7 fields"));
                }
                *f = number(tok)?;
            }
            let close = expect(t, 12, "')'", line)?;
            if close.text != ")" {
                return Err(syntax(close, "PULSE takes exactly 7 fields"));
            }
            let [v_low, v_high, delay, rise, fall, width, period] = fields;
            let pulse = Pulse {
                v_low,
                v_high,
                delay,
                rise,
                fall,
                width,
                period,
            };
            pulse.validate().map_err(|m| syntax(kind_tok, m))?;
            (SourceKind::Pulse(pulse), 13)
        }
        _ => (SourceKind::Dc(number(kind_tok)?), 4),
    };
    if let Some(extra) = t.get(consumed) {
        return Err(syntax(extra, "unexpected token after source value"));
    }
    Ok(IndependentSource {
        name: t[0].text.clone(),
        positive,
        negative,
        kind,
    })
}

fn parse_ports(line: &LogicalLine) -> Result<Ports, NetlistError> {
    let mut ports = Ports::default();
    for tok in &line.tokens[1..] {
        let Some((key, value)) = tok.text.split_once('=') else {
            return Err(syntax(tok, "expected key=value in .ports"));
        };
        let list: Vec<String> = value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        match key.to_ascii_lowercase().as_str() {
            "in" => ports.inputs = list,
            "out" => ports.outputs = list,
            "vdd" => {
                if list.len() != 1 {
                    return Err(syntax(tok, "vdd= takes exactly one net"));
                }
                ports.vdd = list.into_iter().next();
            }
            other => return Err(syntax(tok, format!("unknown port class '{other}'"))),
        }
    }
    Ok(ports)
}

/// Parses netlist text, returning the circuit and any warnings.
pub fn parse_with_diagnostics(text: &str) -> Result<(Circuit, Vec<Diagnostic>), NetlistError> {
    let mut circuit = Circuit::new();
    let mut diagnostics = Vec::new();
    let mut ports: Option<(Ports, usize)> = None;
    let mut first_use: std::collections::BTreeMap<String, usize> = Default::default();

    for line in logical_lines(text) {
        let head = &line.tokens[0];
        let lower = head.text.to_ascii_lowercase();
        if lower.starts_with('.') {
            match lower.as_str() {
                ".end" => break,
                ".ports" => ports = Some((parse_ports(&line)?, line.line)),
                _ => diagnostics.push(Diagnostic {
                    line: Some(line.line),
                    message: format!("ignoring unsupported directive '{}'", head.text),
                }),
            }
            continue;
        }
        let letter = head.text.chars().next().expect("tokens are non-empty");
        let result = match letter.to_ascii_uppercase() {
            'M' => parse_mosfet(&line).and_then(|m| {
                if m.width < MIN_FEATURE_WIDTH {
                    diagnostics.push(Diagnostic {
                        line: Some(line.line),
                        message: format!(
                            "{}: width {} below the 2 µm minimum feature",
                            m.name, m.width
                        ),
                    });
                }
                circuit.add_mosfet(m)
            }),
            'C' => parse_capacitor(&line).and_then(|c| circuit.add_capacitor(c)),
            'V' => parse_source(&line).and_then(|s| circuit.add_source(s)),
            _ => {
                return Err(NetlistError::UnknownDevice {
                    line: line.line,
                    letter,
                })
            }
        };
        match result {
            Err(NetlistError::Invalid(message)) => return Err(syntax(head, message)),
            Err(e) => return Err(e),
            Ok(()) => {}
        }
        for tok in &line.tokens[1..] {
            first_use.entry(tok.text.clone()).or_insert(line.line);
        }
    }

    if circuit.device_count() == 0 {
        return Err(NetlistError::NoDevices);
    }
    if let Some((p, _)) = ports {
        circuit.set_ports(p)?;
    }
    for (net, count) in circuit.net_references() {
        if count == 1 && !super::is_ground(net) {
            diagnostics.push(Diagnostic {
                line: first_use.get(net).copied(),
                message: format!("net '{net}' is referenced only once"),
            });
        }
    }
    Ok((circuit, diagnostics))
}

/// Parses netlist text. Warnings are forwarded to the `log` facade.
pub fn parse(text: &str) -> Result<Circuit, NetlistError> {
    let (circuit, diagnostics) = parse_with_diagnostics(text)?;
    for d in diagnostics {
        match d.line {
            Some(l) => warn!("line {l}: {}", d.message),
            None => warn!("{}", d.message),
        }
    }
    Ok(circuit)
}
