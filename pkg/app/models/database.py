from sqlalchemy import Column, Float, Integer, String, Text, create_engine
from sqlalchemy.orm import declarative_base, sessionmaker
import os

# Get database URL from environment or use SQLite by default
DATABASE_URL = os.getenv("DATABASE_URL", "sqlite:///./cogpilot.db")


def make_engine(url: str = DATABASE_URL):
    connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
    return create_engine(url, connect_args=connect_args)


# Create SQLAlchemy engine and session
engine = make_engine()
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

# Create base class for declarative models
Base = declarative_base()


class RunRecordDB(Base):
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)
    command = Column(String, index=True)
    preset = Column(String, nullable=True, index=True)
    seed = Column(String)  # seeds span the full unsigned 64-bit range
    trials = Column(Integer)
    workers = Column(Integer)
    config_json = Column(Text)
    version = Column(String)
    output_path = Column(String, nullable=True)
    rows = Column(Integer)
    elapsed_s = Column(Float)
    created_at = Column(String)  # Store ISO timestamp
