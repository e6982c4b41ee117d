from pymongo import MongoClient, ASCENDING, DESCENDING
from bson.objectid import ObjectId
import copy
import datetime
import logging
import math


class ResultArchive:
    """MongoDB archive of experiment verdicts.

    Every write returns a (success, message) pair; an unreachable server is
    reported, never raised past save_verdict.
    """

    def __init__(self, connection_string="mongodb://localhost:27017/", db_name="rodflux", connect=True):
        self.connection_string = connection_string
        self.db_name = db_name
        self.client = None
        self.db = None
        self.runs_collection = None
        if connect:
            self.connect()

    def connect(self):
        try:
            self.client = MongoClient(self.connection_string, serverSelectionTimeoutMS=5000)
            self.client.server_info()  # Test connection
            self.db = self.client[self.db_name]
            self.runs_collection = self.db["runs"]
            self._create_run_indexes()
            logging.info(f"Result archive connected to {self.db_name}")
        except Exception as e:
            logging.error(f"Failed to connect to MongoDB: {str(e)}")
            raise

    def _create_run_indexes(self):
        try:
            self.runs_collection.create_index([("experiment", ASCENDING), ("createdAt", DESCENDING)])
            logging.debug("Indexes created for runs collection")
        except Exception as e:
            logging.error(f"Failed to create indexes for runs: {str(e)}")

    def close_connection(self):
        if self.client:
            try:
                self.client.close()
                self.client = None
                self.db = None
                self.runs_collection = None
                logging.info("MongoDB connection closed")
            except Exception as e:
                logging.error(f"Error closing MongoDB connection: {str(e)}")

    @staticmethod
    def _storable(value):
        # non-finite floats are stored as strings
        if isinstance(value, float) and not math.isfinite(value):
            return str(value)
        if isinstance(value, dict):
            return {k: ResultArchive._storable(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [ResultArchive._storable(v) for v in value]
        return value

    def save_verdict(self, document):
        if not isinstance(document, dict) or not document.get("experiment"):
            return False, f"Verdict document must be a dictionary with an 'experiment' field, received: {type(document)}"
        if self.runs_collection is None:
            return False, "Result archive is not connected"
        try:
            record = self._storable(copy.deepcopy(document))
            record["_id"] = ObjectId()
            record["createdAt"] = datetime.datetime.now().isoformat()
            result = self.runs_collection.insert_one(record)
            logging.info(f"Archived run {result.inserted_id} of {document['experiment']}")
            return True, f"Run archived with id {result.inserted_id}"
        except Exception as e:
            logging.error(f"Failed to archive run of {document.get('experiment')}: {str(e)}")
            return False, f"Failed to archive run: {str(e)}"

    def list_runs(self, experiment=None, limit=20):
        if self.runs_collection is None:
            return []
        try:
            query = {"experiment": experiment} if experiment else {}
            runs = []
            for run in self.runs_collection.find(query).sort("createdAt", DESCENDING).limit(limit):
                run["_id"] = str(run["_id"])
                runs.append(run)
            logging.debug(f"Loaded {len(runs)} archived runs for {experiment or 'all experiments'}")
            return runs
        except Exception as e:
            logging.error(f"Error loading archived runs: {str(e)}")
            return []


def archive_verdict(connection_string, document):
    """Connect, store one verdict document and disconnect; (success, message)."""
    try:
        archive = ResultArchive(connection_string)
    except Exception as e:
        return False, f"Result archive unavailable: {str(e)}"
    try:
        return archive.save_verdict(document)
    finally:
        archive.close_connection()
