import datetime
import json
import logging
from typing import Any, Callable, Dict, Optional

from sqlalchemy.orm import Session

from app.models.config import ExperimentConfig
from app.models.database import Base, RunRecordDB, SessionLocal

# Configure logging
logger = logging.getLogger(__name__)

SessionFactory = Callable[[], Session]


def _ensure_tables(db: Session) -> None:
    Base.metadata.create_all(bind=db.get_bind())


def record_run(
    command: str,
    config: ExperimentConfig,
    version: str,
    rows: int,
    elapsed_s: float,
    workers: int,
    preset: Optional[str] = None,
    output_path: Optional[str] = None,
    session_factory: SessionFactory = SessionLocal,
) -> Optional[int]:
    """Insert one run record. Failures are logged and reported as ``None``."""
    db = session_factory()
    try:
        _ensure_tables(db)
        record = RunRecordDB(
            command=command,
            preset=preset,
            seed=str(config.seed),
            trials=config.trials,
            workers=workers,
            config_json=json.dumps(config.model_dump(mode="json", by_alias=True), sort_keys=True),
            version=version,
            output_path=output_path,
            rows=rows,
            elapsed_s=elapsed_s,
            created_at=datetime.datetime.now().isoformat(),
        )
        db.add(record)
        db.commit()
        return record.id
    except Exception as e:
        db.rollback()
        logger.warning(f"Could not record run in ledger: {str(e)}")
        return None
    finally:
        db.close()


def _summary(record: RunRecordDB) -> Dict[str, Any]:
    return {
        "id": record.id,
        "command": record.command,
        "preset": record.preset,
        "seed": record.seed,
        "trials": record.trials,
        "workers": record.workers,
        "rows": record.rows,
        "elapsed_s": record.elapsed_s,
        "version": record.version,
        "output_path": record.output_path,
        "created_at": record.created_at,
    }


def list_runs(
    limit: int = 10,
    offset: int = 0,
    command: Optional[str] = None,
    session_factory: SessionFactory = SessionLocal,
) -> Dict[str, Any]:
    """Recent runs, newest first, with the total count for pagination."""
    db = session_factory()
    try:
        _ensure_tables(db)
        query = db.query(RunRecordDB)
        if command:
            query = query.filter(RunRecordDB.command == command)
        total = query.count()
        records = (
            query.order_by(RunRecordDB.created_at.desc(), RunRecordDB.id.desc())
            .offset(offset)
            .limit(limit)
            .all()
        )
        return {
            "total": total,
            "offset": offset,
            "limit": limit,
            "items": [_summary(record) for record in records],
        }
    finally:
        db.close()


def get_run(
    run_id: int, session_factory: SessionFactory = SessionLocal
) -> Optional[Dict[str, Any]]:
    """One run including its resolved config, or ``None`` if the id is unknown."""
    db = session_factory()
    try:
        _ensure_tables(db)
        record = db.query(RunRecordDB).filter(RunRecordDB.id == run_id).first()
        if record is None:
            logger.warning(f"Run not found: id={run_id}")
            return None
        details = _summary(record)
        details["config"] = json.loads(record.config_json)
        return details
    finally:
        db.close()
