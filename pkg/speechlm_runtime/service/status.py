"""
Optional HTTP status endpoint for the session service.
"""

import threading

from flask import Flask, jsonify
from flask_cors import CORS

from speechlm_runtime.log import get_logger

logger = get_logger("service.status")


def create_status_app(service) -> Flask:
    """Flask app exposing the registry snapshot at /api/status."""
    app = Flask(__name__)
    CORS(app)

    @app.route("/api/status")
    def status():
        return jsonify(service.status())

    @app.route("/api/sessions/<session_id>")
    def session_status(session_id):
        snapshot = service.registry.snapshot()
        stats = snapshot["sessions"].get(session_id)
        if stats is None:
            return jsonify({"error": "session not found"}), 404
        return jsonify(dict(stats, session_id=session_id))

    return app


def start_status_server(service, host: str, port: int) -> threading.Thread:
    app = create_status_app(service)
    thread = threading.Thread(
        target=app.run,
        kwargs={"host": host, "port": port, "threaded": True, "use_reloader": False},
        name="speechlm-status",
        daemon=True,
    )
    thread.start()
    logger.info(f"Status endpoint at http://{host}:{port}/api/status")
    return thread
