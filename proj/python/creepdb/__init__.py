"""Python access to the creepdb core: formula checks, model evaluation,
the ingestion pipeline and the record store."""

import json as _json

from . import _creepdb

__all__ = [
    "CreepdbError",
    "Store",
    "catalog",
    "check_homogeneity",
    "cli_run",
    "evaluate_model",
    "fit_model",
    "r_squared",
    "render_formula",
    "run_pipeline",
    "screening_metrics",
    "standardize",
    "unit_table",
    "validate_entry",
]

CreepdbError = _creepdb.NativeError


def _code(err):
    return err.args[0] if err.args else None


CreepdbError.code = property(_code)

render_formula = _creepdb.render_formula
standardize = _creepdb.standardize
evaluate_model = _creepdb.evaluate_model
r_squared = _creepdb.r_squared
cli_run = _creepdb.cli_run


def check_homogeneity(equation, symbols):
    """`symbols` is a list of (name, role, unit) triples."""
    return _json.loads(_creepdb.check_homogeneity(equation, [tuple(s) for s in symbols]))


def unit_table():
    return _json.loads(_creepdb.unit_table())


def catalog():
    return _json.loads(_creepdb.catalog())


def fit_model(name, times, strains, init, conditions=None, fixed=None):
    return _json.loads(_creepdb.fit_model(name, list(times), list(strains), conditions or {}, init, fixed or {}))


def screening_metrics(tp, fp, fn, tn):
    return _json.loads(_creepdb.screening_metrics(tp, fp, fn, tn))


def validate_entry(entry):
    return _json.loads(_creepdb.validate_entry(_json.dumps(entry)))


def run_pipeline(manifest, db, config=None, backend=None):
    """Runs every stage over the manifest into the SQLite file `db` and
    returns the report."""
    return _json.loads(_creepdb.run_pipeline(str(manifest), str(db), None if config is None else str(config), backend))


class Store:
    """Read and review access to a record database."""

    def __init__(self, path):
        self._store = _creepdb.Store(str(path))

    def query(self, **filters):
        return _json.loads(self._store.query(_json.dumps(filters)))

    def record(self, record_id):
        text = self._store.record(record_id)
        return None if text is None else _json.loads(text)

    def paper(self, doi):
        text = self._store.paper(doi)
        return None if text is None else _json.loads(text)

    def __len__(self):
        return self._store.record_count()

    def export_csv(self, **filters):
        return self._store.export_csv(_json.dumps(filters))

    def export_data(self, **filters):
        return _json.loads(self._store.export_data(_json.dumps(filters)))

    def stats(self, **filters):
        return _json.loads(self._store.stats(_json.dumps(filters)))

    def review(self, record_id, action, note=""):
        return _json.loads(self._store.review(record_id, action, note))
