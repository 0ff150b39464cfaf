//! Single-pass OSM XML reader.

use std::collections::BTreeMap;
use std::io::{self, BufRead, Read};

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{ElementKind, Member, MemberRole, OsmData, OsmError, OsmNode, OsmRelation, OsmWay};
use crate::geometry::GeoPoint;
use crate::tags::Tags;

/// Counts newlines in the bytes the XML reader has consumed so errors can
/// report a line without buffering the document.
struct LineCounter<R> {
    inner: R,
    newlines: usize,
}

impl<R: BufRead> Read for LineCounter<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.newlines += buf[..n].iter().filter(|&&b| b == b'\n').count();
        Ok(n)
    }
}

impl<R: BufRead> BufRead for LineCounter<R> {
    fn fill_buf(&mut self) -> io::Result<&[u8]> {
        self.inner.fill_buf()
    }

    fn consume(&mut self, amt: usize) {
        if let Ok(buf) = self.inner.fill_buf() {
            let amt = amt.min(buf.len());
            self.newlines += buf[..amt].iter().filter(|&&b| b == b'\n').count();
        }
        self.inner.consume(amt);
    }
}

enum Open {
    Node(OsmNode),
    Way(OsmWay),
    Relation(OsmRelation),
}

impl Open {
    fn tags_mut(&mut self) -> &mut Tags {
        match self {
            Open::Node(n) => &mut n.tags,
            Open::Way(w) => &mut w.tags,
            Open::Relation(r) => &mut r.tags,
        }
    }
}

const KNOWN: &[&[u8]] = &[
    b"osm", b"bounds", b"node", b"way", b"relation", b"tag", b"nd", b"member",
];

struct Parser<R: BufRead> {
    reader: Reader<LineCounter<R>>,
    data: OsmData,
    open: Option<Open>,
}

/// Parse an OSM XML document from any buffered byte stream.
pub fn parse_osm_xml<R: BufRead>(input: R) -> Result<OsmData, OsmError> {
    let mut reader = Reader::from_reader(LineCounter {
        inner: input,
        newlines: 0,
    });
    reader.config_mut().trim_text(true);
    let mut parser = Parser {
        reader,
        data: OsmData::default(),
        open: None,
    };
    parser.run()?;
    let mut data = parser.data;
    data.resolve_dangling();
    Ok(data)
}

pub fn parse_osm_str(xml: &str) -> Result<OsmData, OsmError> {
    parse_osm_xml(xml.as_bytes())
}

impl<R: BufRead> Parser<R> {
    fn line(&self) -> usize {
        self.reader.get_ref().newlines + 1
    }

    fn invalid(&self, message: impl Into<String>) -> OsmError {
        OsmError::InvalidData {
            line: self.line(),
            position: self.reader.buffer_position(),
            message: message.into(),
        }
    }

    fn run(&mut self) -> Result<(), OsmError> {
        let mut buf = Vec::new();
        loop {
            let event = match self.reader.read_event_into(&mut buf) {
                Ok(ev) => ev.into_owned(),
                Err(e) => {
                    return Err(OsmError::Xml {
                        line: self.line(),
                        position: self.reader.error_position(),
                        message: e.to_string(),
                    })
                }
            };
            match event {
                Event::Start(e) => self.start(&e, false)?,
                Event::Empty(e) => self.start(&e, true)?,
                Event::End(e) => {
                    let name = e.name();
                    if matches!(name.as_ref(), b"node" | b"way" | b"relation") {
                        self.close()?;
                    }
                }
                Event::Eof => break,
                _ => {}
            }
            buf.clear();
        }
        if self.open.is_some() {
            return Err(self.invalid("document ended inside an element"));
        }
        Ok(())
    }

    fn attrs(&self, e: &BytesStart) -> Result<BTreeMap<String, String>, OsmError> {
        let mut out = BTreeMap::new();
        for attr in e.attributes() {
            let attr = attr.map_err(|err| OsmError::Xml {
                line: self.line(),
                position: self.reader.buffer_position(),
                message: err.to_string(),
            })?;
            let key = String::from_utf8_lossy(attr.key.as_ref()).into_owned();
            let value = attr
                .unescape_value()
                .map_err(|err| self.invalid(err.to_string()))?
                .into_owned();
            out.insert(key, value);
        }
        Ok(out)
    }

    fn req<'a>(&self, attrs: &'a BTreeMap<String, String>, key: &str, el: &str) -> Result<&'a str, OsmError> {
        attrs
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| self.invalid(format!("<{el}> without {key} attribute")))
    }

    fn num<T: std::str::FromStr>(&self, s: &str, what: &str) -> Result<T, OsmError> {
        s.parse()
            .map_err(|_| self.invalid(format!("cannot parse {what} {s:?}")))
    }

    fn start(&mut self, e: &BytesStart, empty: bool) -> Result<(), OsmError> {
        let name = e.name();
        let name = name.as_ref();
        if !KNOWN.contains(&name) {
            self.data.skipped_elements += 1;
            log::debug!("skipping element <{}>", String::from_utf8_lossy(name));
            return Ok(());
        }
        match name {
            b"node" | b"way" | b"relation" => {
                if self.open.is_some() {
                    return Err(self.invalid("nested OSM entity"));
                }
                let attrs = self.attrs(e)?;
                let el = std::str::from_utf8(name).unwrap_or("entity");
                let id: i64 = self.num(self.req(&attrs, "id", el)?, "id")?;
                self.open = Some(match name {
                    b"node" => {
                        let lat: f64 = self.num(self.req(&attrs, "lat", el)?, "lat")?;
                        let lon: f64 = self.num(self.req(&attrs, "lon", el)?, "lon")?;
                        let location = GeoPoint::new(lat, lon)
                            .map_err(|err| self.invalid(format!("node {id}: {err}")))?;
                        Open::Node(OsmNode {
                            id,
                            location,
                            tags: Tags::new(),
                        })
                    }
                    b"way" => Open::Way(OsmWay {
                        id,
                        node_refs: Vec::new(),
                        tags: Tags::new(),
                    }),
                    _ => Open::Relation(OsmRelation {
                        id,
                        members: Vec::new(),
                        tags: Tags::new(),
                    }),
                });
                if empty {
                    self.close()?;
                }
            }
            b"tag" => {
                let attrs = self.attrs(e)?;
                let k = self.req(&attrs, "k", "tag")?.to_string();
                let v = self.req(&attrs, "v", "tag")?.to_string();
                match self.open.as_mut() {
                    Some(open) => {
                        open.tags_mut().insert(k, v);
                    }
                    None => self.data.skipped_elements += 1,
                }
            }
            b"nd" => {
                let attrs = self.attrs(e)?;
                let r: i64 = self.num(self.req(&attrs, "ref", "nd")?, "nd ref")?;
                match self.open.as_mut() {
                    Some(Open::Way(w)) => w.node_refs.push(r),
                    _ => self.data.skipped_elements += 1,
                }
            }
            b"member" => {
                let attrs = self.attrs(e)?;
                let kind = match self.req(&attrs, "type", "member")? {
                    "node" => ElementKind::Node,
                    "way" => ElementKind::Way,
                    "relation" => ElementKind::Relation,
                    other => return Err(self.invalid(format!("unknown member type {other:?}"))),
                };
                let reference: i64 = self.num(self.req(&attrs, "ref", "member")?, "member ref")?;
                let role = MemberRole::from_str(attrs.get("role").map(String::as_str).unwrap_or(""));
                match self.open.as_mut() {
                    Some(Open::Relation(r)) => r.members.push(Member {
                        kind,
                        reference,
                        role,
                    }),
                    _ => self.data.skipped_elements += 1,
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn close(&mut self) -> Result<(), OsmError> {
        let Some(open) = self.open.take() else {
            return Ok(());
        };
        let duplicate = match open {
            Open::Node(n) => {
                let id = n.id;
                self.data.nodes.insert(id, n).map(|_| (ElementKind::Node, id))
            }
            Open::Way(w) => {
                let id = w.id;
                self.data.ways.insert(id, w).map(|_| (ElementKind::Way, id))
            }
            Open::Relation(r) => {
                let id = r.id;
                self.data.relations.insert(id, r).map(|_| (ElementKind::Relation, id))
            }
        };
        match duplicate {
            Some((kind, id)) => Err(self.invalid(format!("duplicate {kind} id {id}"))),
            None => Ok(()),
        }
    }
}
