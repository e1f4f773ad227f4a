from __future__ import annotations

from datetime import datetime

from peewee import (
    BooleanField,
    DateTimeField,
    DoesNotExist,
    FloatField,
    IntegerField,
    Model,
    SqliteDatabase,
    TextField,
)


def init_db(filename: str = ":memory:") -> SqliteDatabase:
    """
    Bind the bench history models to an SQLite file, creating missing tables.
    """
    db = SqliteDatabase(filename, pragmas={"journal_mode": "wal", "busy_timeout": 5000})
    db.bind(BaseModel.model_registry)
    db.create_tables(BaseModel.model_registry)
    return db


class BaseModel(Model):
    # Attached by peewee at class creation.
    id: int
    DoesNotExist: type[DoesNotExist]

    model_registry: list[type[BaseModel]] = []

    @classmethod
    def validate_model(cls):
        if cls.__name__ != "BaseModel":
            cls.model_registry.append(cls)
        return super().validate_model()


class BenchRun(BaseModel):
    """
    One measured row of the extraction benchmark.
    """

    created_at = DateTimeField(default=datetime.now)
    m = IntegerField(index=True)
    polynomial = TextField()
    gates = IntegerField()
    threads = IntegerField()
    wall_time_ms = FloatField()
    peak_terms = IntegerField()
    verdict = BooleanField(null=True, default=None)

    @classmethod
    def history(cls, m: int | None = None):
        query = cls.select()
        if m is not None:
            query = query.where(cls.m == m)
        return query.order_by(cls.created_at.desc(), cls.id.desc())
