//! HTTP routes under `/api/v1`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use funcprobe_core::annotate::AnnotationItem;
use funcprobe_core::corpus::read_dataset;
use funcprobe_core::task::{Task, TaskFormat};

use crate::config::AnnotationConfig;
use crate::store::{
    items_from_dataset, list_project_dirs, BatchItem, Progress, Project, ProjectSettings, ProjectSummary,
    SubmittedValue,
};
use crate::{ServiceError, SCHEMA_VERSION};

type Shared = Arc<Mutex<Project>>;

/// Loaded projects. Each project has its own lock, so all writes to one
/// project go through a single appender.
#[derive(Debug)]
pub struct AppState {
    root: PathBuf,
    defaults: AnnotationConfig,
    projects: RwLock<BTreeMap<String, Shared>>,
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    // A panic mid-append leaves at most a torn final line, which reopening
    // handles; the in-memory state itself stays usable.
    m.lock().unwrap_or_else(PoisonError::into_inner)
}

impl AppState {
    /// Open every project under `root`, with default project settings.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, ServiceError> {
        Self::with_defaults(root, AnnotationConfig::default())
    }

    /// Open every project under `root`; new projects not naming their own
    /// settings take them from `defaults`.
    pub fn with_defaults(root: impl Into<PathBuf>, defaults: AnnotationConfig) -> Result<Self, ServiceError> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| ServiceError::io(&root, e))?;
        let mut projects = BTreeMap::new();
        for dir in list_project_dirs(&root)? {
            let p = Project::open(&dir)?;
            log::info!("loaded project {} ({} items, {} responses)", p.id(), p.items().len(), p.responses().len());
            projects.insert(p.id().to_string(), Arc::new(Mutex::new(p)));
        }
        Ok(AppState { root, defaults, projects: RwLock::new(projects) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn project(&self, id: &str) -> Result<Shared, ServiceError> {
        let map = self.projects.read().unwrap_or_else(PoisonError::into_inner);
        map.get(id).cloned().ok_or_else(|| ServiceError::UnknownProject(id.to_string()))
    }

    pub fn summaries(&self) -> Vec<ProjectSummary> {
        let map = self.projects.read().unwrap_or_else(PoisonError::into_inner);
        map.values().map(|p| lock(p).summary()).collect()
    }

    pub fn create(&self, settings: ProjectSettings, items: Vec<AnnotationItem>) -> Result<ProjectSummary, ServiceError> {
        let mut map = self.projects.write().unwrap_or_else(PoisonError::into_inner);
        if map.contains_key(&settings.project_id) {
            return Err(ServiceError::ProjectExists(settings.project_id));
        }
        let p = Project::create(&self.root, settings, items)?;
        let summary = p.summary();
        map.insert(summary.project_id.clone(), Arc::new(Mutex::new(p)));
        Ok(summary)
    }

    pub fn next_batch(&self, project_id: &str, annotator: &str) -> Result<Option<BatchView>, ServiceError> {
        let shared = self.project(project_id)?;
        let mut p = lock(&shared);
        let Some(a) = p.next_batch(annotator)? else { return Ok(None) };
        let by_id: BTreeMap<&str, &AnnotationItem> = p.items().iter().map(|i| (i.item_id.as_str(), i)).collect();
        let items = a.item_ids.iter().map(|id| BatchItem::from(by_id[id.as_str()])).collect();
        Ok(Some(BatchView {
            assignment_id: a.assignment_id,
            annotator_id: a.annotator_id,
            task: p.settings.task,
            format: p.settings.task.format(),
            items,
        }))
    }

    pub fn submit(&self, project_id: &str, body: &SubmitRequest) -> Result<usize, ServiceError> {
        let shared = self.project(project_id)?;
        let mut p = lock(&shared);
        p.submit(&body.assignment_id, &body.responses)
    }

    pub fn progress(&self, project_id: &str) -> Result<Progress, ServiceError> {
        let shared = self.project(project_id)?;
        let p = lock(&shared).progress();
        Ok(p)
    }
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn check_version(v: u32) -> Result<(), ServiceError> {
    if v == SCHEMA_VERSION {
        Ok(())
    } else {
        Err(ServiceError::SchemaVersion(v))
    }
}

/// Parse a JSON body into our error type rather than axum's plain-text
/// rejection.
fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    serde_json::from_slice(body).map_err(|e| ServiceError::BadRequest(e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectList {
    pub schema_version: u32,
    pub projects: Vec<ProjectSummary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreateProject {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub project_id: String,
    pub task: Task,
    /// Items given inline...
    #[serde(default)]
    pub items: Option<Vec<AnnotationItem>>,
    /// ...or a dataset file on the server.
    #[serde(default)]
    pub items_file: Option<PathBuf>,
    #[serde(default)]
    pub required_responses: Option<usize>,
    #[serde(default)]
    pub distinct_annotators: Option<bool>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectCreated {
    pub schema_version: u32,
    pub project: ProjectSummary,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchView {
    pub assignment_id: String,
    pub annotator_id: String,
    pub task: Task,
    pub format: TaskFormat,
    pub items: Vec<BatchItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchResponse {
    pub schema_version: u32,
    /// `None` once the annotator has nothing left to do.
    pub assignment: Option<BatchView>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BatchQuery {
    pub annotator: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitRequest {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub assignment_id: String,
    pub responses: Vec<SubmittedValue>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitAck {
    pub schema_version: u32,
    pub assignment_id: String,
    pub accepted: usize,
}

type ApiResult<T> = Result<T, ServiceError>;

async fn list_projects(State(s): State<Arc<AppState>>) -> Json<ProjectList> {
    Json(ProjectList { schema_version: SCHEMA_VERSION, projects: s.summaries() })
}

async fn create_project(State(s): State<Arc<AppState>>, body: Bytes) -> ApiResult<(StatusCode, Json<ProjectCreated>)> {
    let req: CreateProject = parse(&body)?;
    check_version(req.schema_version)?;
    let items = match (req.items, &req.items_file) {
        (Some(items), None) => items,
        (None, Some(path)) => items_from_dataset(&read_dataset(path)?),
        _ => return Err(ServiceError::BadRequest("give exactly one of `items` and `items_file`".into())),
    };
    let mut settings = ProjectSettings::new(req.project_id, req.task);
    settings.required_responses = req.required_responses.unwrap_or(s.defaults.responses_per_item);
    settings.distinct_annotators = req.distinct_annotators.unwrap_or(s.defaults.distinct_annotators);
    settings.seed = req.seed.unwrap_or(settings.seed);
    let project = s.create(settings, items)?;
    log::info!("created project {} with {} items", project.project_id, project.items);
    Ok((StatusCode::CREATED, Json(ProjectCreated { schema_version: SCHEMA_VERSION, project })))
}

async fn next_batch(
    State(s): State<Arc<AppState>>,
    UrlPath(id): UrlPath<String>,
    Query(q): Query<BatchQuery>,
) -> ApiResult<Json<BatchResponse>> {
    let annotator = q.annotator.ok_or_else(|| ServiceError::BadRequest("missing `annotator` query parameter".into()))?;
    let assignment = s.next_batch(&id, &annotator)?;
    Ok(Json(BatchResponse { schema_version: SCHEMA_VERSION, assignment }))
}

async fn submit(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>, body: Bytes) -> ApiResult<Json<SubmitAck>> {
    let req: SubmitRequest = parse(&body)?;
    check_version(req.schema_version)?;
    let accepted = s.submit(&id, &req)?;
    Ok(Json(SubmitAck { schema_version: SCHEMA_VERSION, assignment_id: req.assignment_id, accepted }))
}

async fn progress(State(s): State<Arc<AppState>>, UrlPath(id): UrlPath<String>) -> ApiResult<Json<Progress>> {
    s.progress(&id).map(Json)
}

/// The API router, plus static files at `/` when `static_dir` is set.
pub fn router(state: Arc<AppState>, static_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/projects", get(list_projects).post(create_project))
        .route("/projects/{id}/batch", get(next_batch))
        .route("/projects/{id}/responses", post(submit))
        .route("/projects/{id}/progress", get(progress));
    let app = Router::new().nest("/api/v1", api).with_state(state);
    match static_dir {
        Some(dir) => app.fallback_service(ServeDir::new(dir)),
        None => app,
    }
}

/// Serve until interrupted.
pub async fn serve(state: Arc<AppState>, bind: std::net::SocketAddr, static_dir: Option<&Path>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(bind).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state, static_dir))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
