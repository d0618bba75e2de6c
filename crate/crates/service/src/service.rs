//! Session registry, replication pools and the response log.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use evarena::seed::{rng_for, stable_hash};
use rand::seq::SliceRandom;

use crate::audit::{audit_value, Secrets};
use crate::catalog::Catalog;
use crate::model::{
    option_label, AnswerAck, ChoiceKind, Condition, CreateSession, ItemView, NextItem, OptionView,
    Progress, SessionCreated, SessionReport, SubmitAnswer,
};
use crate::plan::{plan_items, PlannedItem};
use crate::report::{build_report, ResolvedResponse};
use crate::store::{now_ms, read_log, LogRecord, LogWriter};
use crate::ServiceError;

pub const LOG_FILE: &str = "responses.jsonl";

struct Pool {
    /// Creation request with per-session fields cleared.
    key: CreateSession,
    items: Vec<PlannedItem>,
    answered: Vec<AtomicUsize>,
    members: Mutex<Vec<String>>,
}

impl Pool {
    fn count(&self, idx: usize) -> usize {
        self.answered[idx].load(Ordering::SeqCst)
    }
}

struct Session {
    id: String,
    condition: Condition,
    pool: Arc<Pool>,
    replication: usize,
    /// Pool item indices in serving order.
    queue: Vec<usize>,
    item_ids: Vec<String>,
    by_item: HashMap<String, usize>,
    pending: Option<usize>,
    seen_questions: HashSet<String>,
    choices: Vec<Option<usize>>,
    /// Queue positions in answer order.
    answer_log: Vec<usize>,
}

impl Session {
    fn eligible(&self, pos: usize) -> bool {
        let idx = self.queue[pos];
        self.choices[pos].is_none()
            && !self.seen_questions.contains(&self.pool.items[idx].example_id)
            && self.pool.count(idx) < self.replication
    }

    fn progress(&self) -> Progress {
        let open = (0..self.queue.len()).filter(|&p| self.eligible(p)).count();
        Progress {
            answered: self.answer_log.len(),
            remaining: open + usize::from(self.pending.is_some()),
        }
    }
}

pub struct Service {
    catalog: Arc<Catalog>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Session>>>>,
    pools: Mutex<HashMap<String, Arc<Pool>>>,
    log: Mutex<Option<LogWriter>>,
    log_path: Option<PathBuf>,
}

impl Service {
    /// A service without persistence.
    pub fn in_memory(catalog: Arc<Catalog>) -> Self {
        Self {
            catalog,
            sessions: RwLock::new(HashMap::new()),
            pools: Mutex::new(HashMap::new()),
            log: Mutex::new(None),
            log_path: None,
        }
    }

    /// Replay `data_dir/responses.jsonl`, then keep appending to it.
    pub fn open(catalog: Arc<Catalog>, data_dir: &Path) -> Result<Self, ServiceError> {
        std::fs::create_dir_all(data_dir)
            .map_err(|e| ServiceError::Io(format!("{}: {e}", data_dir.display())))?;
        let path = data_dir.join(LOG_FILE);
        let mut service = Self::in_memory(catalog);
        let records = read_log(&path)?;
        for record in &records {
            service.replay(record)?;
        }
        if !records.is_empty() {
            log::info!("replayed {} log records from {}", records.len(), path.display());
        }
        service.log = Mutex::new(Some(LogWriter::open(&path)?));
        service.log_path = Some(path);
        Ok(service)
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn log_path(&self) -> Option<&Path> {
        self.log_path.as_deref()
    }

    fn append(&self, record: &LogRecord) -> Result<(), ServiceError> {
        match self.log.lock().unwrap().as_mut() {
            Some(w) => w.append(record),
            None => Ok(()),
        }
    }

    fn replay(&self, record: &LogRecord) -> Result<(), ServiceError> {
        let wrap = |e: ServiceError| ServiceError::Replay(e.to_string());
        match record {
            LogRecord::SessionCreated { session_id, request, .. } => {
                self.create_with_id(session_id.clone(), request, false).map_err(wrap)?;
            }
            LogRecord::Served { session_id, item_id, .. } => {
                let session = self.session(session_id).map_err(wrap)?;
                let mut s = session.lock().unwrap();
                let pos = *s.by_item.get(item_id).ok_or(ServiceError::UnknownItem).map_err(wrap)?;
                serve_pos(&mut s, pos);
            }
            LogRecord::Answered { session_id, item_id, choice, .. } => {
                let session = self.session(session_id).map_err(wrap)?;
                let mut s = session.lock().unwrap();
                let answer = SubmitAnswer {
                    item_id: item_id.clone(),
                    choice: *choice,
                };
                self.record_answer(&mut s, &answer, false).map_err(wrap)?;
            }
        }
        Ok(())
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<Session>>, ServiceError> {
        self.sessions
            .read()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn create_session(&self, request: &CreateSession) -> Result<SessionCreated, ServiceError> {
        let id = format!("{:032x}", rand::random::<u128>());
        self.create_with_id(id, request, true)
    }

    fn create_with_id(
        &self,
        id: String,
        request: &CreateSession,
        persist: bool,
    ) -> Result<SessionCreated, ServiceError> {
        let mut key = request.clone();
        key.seed = 0;
        let pool_name = request.pool.clone().unwrap_or_else(|| format!("session:{id}"));
        let existing = self.pools.lock().unwrap().get(&pool_name).cloned();
        let pool = match existing {
            Some(p) => p,
            None => {
                let items = plan_items(&self.catalog, request)?;
                let fresh = Arc::new(Pool {
                    key: key.clone(),
                    answered: items.iter().map(|_| AtomicUsize::new(0)).collect(),
                    items,
                    members: Mutex::new(Vec::new()),
                });
                self.pools
                    .lock()
                    .unwrap()
                    .entry(pool_name.clone())
                    .or_insert(fresh)
                    .clone()
            }
        };
        if pool.key != key {
            return Err(ServiceError::PoolConflict(pool_name));
        }
        if persist {
            self.append(&LogRecord::SessionCreated {
                session_id: id.clone(),
                request: request.clone(),
                at_ms: now_ms(),
            })?;
        }
        let ordinal = {
            let mut members = pool.members.lock().unwrap();
            members.push(id.clone());
            members.len() - 1
        };
        let mut queue: Vec<usize> = (0..pool.items.len()).collect();
        queue.shuffle(&mut rng_for(request.seed, &format!("queue/{ordinal}")));
        let item_ids: Vec<String> = (0..queue.len())
            .map(|pos| {
                let h = stable_hash(&["item", &id, &pos.to_string()]);
                format!("{:012x}", h & 0xffff_ffff_ffff)
            })
            .collect();
        let session = Session {
            id: id.clone(),
            condition: request.condition,
            replication: request.replication,
            by_item: item_ids.iter().enumerate().map(|(p, i)| (i.clone(), p)).collect(),
            item_ids,
            choices: vec![None; queue.len()],
            queue,
            pool,
            pending: None,
            seen_questions: HashSet::new(),
            answer_log: Vec::new(),
        };
        let created = SessionCreated {
            session_id: id.clone(),
            items: session.queue.len(),
        };
        self.sessions
            .write()
            .unwrap()
            .insert(id, Arc::new(Mutex::new(session)));
        Ok(created)
    }

    /// The item currently in flight, or the next eligible one.
    pub fn next_item(&self, session_id: &str) -> Result<NextItem, ServiceError> {
        let session = self.session(session_id)?;
        let mut s = session.lock().unwrap();
        if let Some(pos) = s.pending {
            return Ok(NextItem::Item(self.view(&s, pos)));
        }
        let Some(pos) = (0..s.queue.len()).find(|&p| s.eligible(p)) else {
            return Ok(NextItem::Done);
        };
        self.append(&LogRecord::Served {
            session_id: s.id.clone(),
            item_id: s.item_ids[pos].clone(),
            at_ms: now_ms(),
        })?;
        serve_pos(&mut s, pos);
        Ok(NextItem::Item(self.view(&s, pos)))
    }

    pub fn submit_answer(&self, session_id: &str, answer: &SubmitAnswer) -> Result<AnswerAck, ServiceError> {
        let session = self.session(session_id)?;
        let mut s = session.lock().unwrap();
        self.record_answer(&mut s, answer, true)?;
        Ok(AnswerAck {
            accepted: true,
            progress: s.progress(),
        })
    }

    fn record_answer(&self, s: &mut Session, answer: &SubmitAnswer, persist: bool) -> Result<(), ServiceError> {
        let pos = *s.by_item.get(&answer.item_id).ok_or(ServiceError::UnknownItem)?;
        if s.choices[pos].is_some() {
            return Err(ServiceError::Duplicate);
        }
        if s.pending != Some(pos) {
            return Err(ServiceError::NotServed);
        }
        let item = &s.pool.items[s.queue[pos]];
        let arity = match s.condition.choice_kind() {
            ChoiceKind::Option => self.example(&item.example_id)?.num_options(),
            ChoiceKind::Sentence => item.shown.len(),
        };
        if answer.choice >= arity {
            return Err(ServiceError::ChoiceOutOfRange {
                choice: answer.choice,
                arity,
            });
        }
        if persist {
            self.append(&LogRecord::Answered {
                session_id: s.id.clone(),
                item_id: answer.item_id.clone(),
                choice: answer.choice,
                at_ms: now_ms(),
            })?;
        }
        s.choices[pos] = Some(answer.choice);
        s.answer_log.push(pos);
        s.pending = None;
        s.pool.answered[s.queue[pos]].fetch_add(1, Ordering::SeqCst);
        Ok(())
    }

    fn example(&self, id: &str) -> Result<&evarena::Example, ServiceError> {
        self.catalog
            .corpus
            .example(id)
            .ok_or_else(|| ServiceError::UnknownExample(id.to_string()))
    }

    fn resolved<'a>(&self, s: &'a Session) -> Result<Vec<ResolvedResponse<'a>>, ServiceError> {
        s.answer_log
            .iter()
            .map(|&pos| {
                let item = &s.pool.items[s.queue[pos]];
                Ok(ResolvedResponse {
                    item,
                    gold: self.example(&item.example_id)?.gold_index,
                    choice: s.choices[pos].expect("logged answers have a choice"),
                })
            })
            .collect()
    }

    pub fn session_report(&self, session_id: &str) -> Result<SessionReport, ServiceError> {
        let session = self.session(session_id)?;
        let s = session.lock().unwrap();
        Ok(build_report(&s.id, s.condition, &self.resolved(&s)?))
    }

    /// Report over every session sharing a pool.
    pub fn pool_report(&self, pool: &str) -> Result<SessionReport, ServiceError> {
        let p = self
            .pools
            .lock()
            .unwrap()
            .get(pool)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownPool(pool.to_string()))?;
        let members = p.members.lock().unwrap().clone();
        let sessions: Vec<_> = members.iter().map(|m| self.session(m)).collect::<Result<_, _>>()?;
        let guards: Vec<_> = sessions.iter().map(|s| s.lock().unwrap()).collect();
        let mut all = Vec::new();
        for g in &guards {
            all.extend(self.resolved(g)?);
        }
        Ok(build_report(pool, p.key.condition, &all))
    }

    /// Responses recorded per pool item, in planning order.
    pub fn pool_counts(&self, pool: &str) -> Option<Vec<usize>> {
        let pools = self.pools.lock().unwrap();
        let p = pools.get(pool)?;
        Some((0..p.items.len()).map(|i| p.count(i)).collect())
    }

    /// Planned items of a session in serving order, for audits and tests.
    pub fn session_items(&self, session_id: &str) -> Result<Vec<(String, PlannedItem)>, ServiceError> {
        let session = self.session(session_id)?;
        let s = session.lock().unwrap();
        Ok(s.queue
            .iter()
            .zip(&s.item_ids)
            .map(|(&idx, id)| (id.clone(), s.pool.items[idx].clone()))
            .collect())
    }

    /// Leak findings for a payload served to `session_id`. Item payloads
    /// are checked against their own example; everything else against
    /// every identifier the session could reveal.
    pub fn audit_payload(&self, session_id: &str, payload: &serde_json::Value) -> Result<Vec<String>, ServiceError> {
        let session = self.session(session_id)?;
        let s = session.lock().unwrap();
        let mut secrets = Secrets {
            identifiers: self
                .catalog
                .agent_ids()
                .chain(self.catalog.judge_ids())
                .map(String::from)
                .collect(),
            hidden_sentences: Vec::new(),
        };
        secrets.identifiers.extend(s.pool.key.pool.clone());
        let item_pos = payload
            .get("item_id")
            .and_then(|v| v.as_str())
            .and_then(|id| s.by_item.get(id).copied());
        match item_pos {
            Some(pos) => {
                let item = &s.pool.items[s.queue[pos]];
                let ex = self.example(&item.example_id)?;
                let passage = self.catalog.corpus.passage_of(ex);
                secrets.identifiers.push(ex.id.clone());
                secrets.identifiers.push(passage.id.clone());
                let shown: Vec<&str> = item.shown.iter().map(|&i| passage.sentence_text(i)).collect();
                secrets.hidden_sentences = (0..passage.len())
                    .filter(|i| !item.shown.contains(i))
                    .map(|i| passage.sentence_text(i))
                    .filter(|t| !shown.iter().any(|s| s.contains(t)) && !ex.question.raw.contains(t))
                    .filter(|t| !ex.options.iter().any(|o| o.raw.contains(t)))
                    .map(String::from)
                    .collect();
            }
            None => {
                for &idx in &s.queue {
                    let ex = self.example(&s.pool.items[idx].example_id)?;
                    secrets.identifiers.push(ex.id.clone());
                    secrets.identifiers.push(ex.passage_id.clone());
                }
            }
        }
        Ok(audit_value(payload, &secrets))
    }

    fn view(&self, s: &Session, pos: usize) -> ItemView {
        let item = &s.pool.items[s.queue[pos]];
        let ex = self
            .catalog
            .corpus
            .example(&item.example_id)
            .expect("planned items reference catalog examples");
        let passage = self.catalog.corpus.passage_of(ex);
        let option = |i: usize| OptionView {
            label: option_label(i),
            text: ex.options[i].raw.clone(),
        };
        ItemView {
            item_id: s.item_ids[pos].clone(),
            question: ex.question.raw.clone(),
            options: (0..ex.num_options()).map(option).collect(),
            sentences: item.shown.iter().map(|&i| passage.sentence_text(i).to_string()).collect(),
            choose: s.condition.choice_kind(),
            supported_option: match s.condition {
                Condition::HumanEvidenceAnnotation => item.target.map(option),
                _ => None,
            },
            progress: s.progress(),
        }
    }
}

fn serve_pos(s: &mut Session, pos: usize) {
    let example = s.pool.items[s.queue[pos]].example_id.clone();
    s.seen_questions.insert(example);
    s.pending = Some(pos);
}
