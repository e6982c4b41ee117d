from unittest import mock

import pytest

import database
from database import ResultArchive, archive_verdict


@pytest.fixture
def client(monkeypatch):
    instance = mock.MagicMock()
    factory = mock.MagicMock(return_value=instance)
    monkeypatch.setattr(database, "MongoClient", factory)
    return instance


def document():
    return {"experiment": "tagged-msd-setupA", "passed": True,
            "runs": [{"eps": 0.005, "statistics": [{"name": "d(t=1)_variance", "z": float("nan")}]}]}


class TestResultArchive:
    def test_save_verdict(self, client):
        archive = ResultArchive("mongodb://example:27017/")
        ok, message = archive.save_verdict(document())
        assert ok, message
        record = archive.runs_collection.insert_one.call_args[0][0]
        assert record["experiment"] == "tagged-msd-setupA"
        assert "createdAt" in record and "_id" in record
        assert record["runs"][0]["statistics"][0]["z"] == "nan"
        archive.runs_collection.create_index.assert_called_once()

    def test_rejects_documents_without_experiment(self, client):
        archive = ResultArchive()
        ok, message = archive.save_verdict({"passed": True})
        assert not ok
        archive.runs_collection.insert_one.assert_not_called()

    def test_insert_failure_is_reported(self, client):
        archive = ResultArchive()
        archive.runs_collection.insert_one.side_effect = RuntimeError("disk full")
        ok, message = archive.save_verdict(document())
        assert not ok and "disk full" in message

    def test_not_connected(self):
        archive = ResultArchive(connect=False)
        assert archive.client is None
        assert archive.save_verdict(document())[0] is False
        assert archive.list_runs() == []

    def test_list_runs(self, client):
        archive = ResultArchive()
        cursor = archive.runs_collection.find.return_value.sort.return_value.limit
        cursor.return_value = [{"_id": 7, "experiment": "fourier-setupA"}]
        runs = archive.list_runs("fourier-setupA", limit=5)
        assert runs == [{"_id": "7", "experiment": "fourier-setupA"}]
        archive.runs_collection.find.assert_called_once_with({"experiment": "fourier-setupA"})
        cursor.assert_called_once_with(5)

    def test_close_connection(self, client):
        archive = ResultArchive()
        archive.close_connection()
        client.close.assert_called_once()
        assert archive.runs_collection is None


class TestArchiveVerdict:
    def test_unreachable_server(self, monkeypatch):
        monkeypatch.setattr(database, "MongoClient", mock.MagicMock(side_effect=RuntimeError("no server")))
        ok, message = archive_verdict("mongodb://nowhere:1/", document())
        assert not ok and "no server" in message

    def test_round_trip(self, client):
        ok, _ = archive_verdict("mongodb://example:27017/", document())
        assert ok
        client.close.assert_called_once()
