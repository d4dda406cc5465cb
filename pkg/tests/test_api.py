import pytest
from fastapi.testclient import TestClient

import api.pipeline
from api.main import app
from lamdiff.errors import InvariantViolation

PRODUCT = "(program (arg-type (prod (real 1) (real 1)))\n  (body (op mul (pair (fst arg) (snd arg)))))"


@pytest.fixture
def client():
    with TestClient(app) as client:
        yield client


class TestOps:
    def test_lists_smooth_and_linear_operations(self, client):
        response = client.get("/api/v1/ops")
        assert response.status_code == 200
        names = {op["name"] for op in response.json()}
        assert {"mul", "map", "lmul", "lzip"} <= names

    def test_linear_filter(self, client):
        ops = client.get("/api/v1/ops", params={"linear": "false"}).json()
        assert ops and not any(op["linear"] for op in ops)


class TestPrograms:
    def test_check(self, client):
        response = client.post("/api/v1/programs/check", json={"source": PRODUCT})
        assert response.json() == {"type": "(fun (prod (real 1) (real 1)) (real 1))"}

    def test_reverse_then_evaluate(self, client):
        body = client.post("/api/v1/programs/reverse", json={"source": PRODUCT}).json()
        assert body["mode"] == "reverse"
        assert body["derivative_type"] == "(fun (prod (real 1) (real 1)) (linfun (real 1) (prod (real 1) (real 1))))"
        response = client.post(
            "/api/v1/programs/eval",
            json={"source": body["derivative"], "point": [2.0, 3.0], "direction": [1.0]},
        )
        assert response.json() == {"value": [3.0, 2.0]}

    def test_forward(self, client):
        body = client.post("/api/v1/programs/forward", json={"source": PRODUCT}).json()
        assert body["primal_type"] == "(fun (prod (real 1) (real 1)) (real 1))"

    def test_jacobian(self, client):
        response = client.post("/api/v1/programs/jacobian", json={"source": PRODUCT, "point": [2.0, 3.0]})
        assert response.status_code == 200
        report = response.json()
        assert report["jacRev"] == [[3.0, 2.0]]
        assert report["maxRelErrFwdRev"] == 0.0

    def test_parse_error_is_unprocessable(self, client):
        response = client.post("/api/v1/programs/check", json={"source": "(program"})
        assert response.status_code == 422
        assert response.json()["detail"].startswith("1:1:")

    def test_bad_index(self, client):
        response = client.post("/api/v1/programs/check", json={"source": PRODUCT, "index": 3})
        assert response.status_code == 422

    def test_too_many_coordinates(self, client, monkeypatch):
        monkeypatch.setattr(api.pipeline, "MAX_POINTS", 1)
        response = client.post("/api/v1/programs/eval", json={"source": PRODUCT, "point": [2.0, 3.0]})
        assert response.status_code == 422

    def test_step_must_be_positive(self, client):
        response = client.post("/api/v1/programs/jacobian", json={"source": PRODUCT, "point": [1.0, 1.0], "h": 0})
        assert response.status_code == 422

    @pytest.mark.parametrize("endpoint", ["forward", "jacobian"])
    def test_self_check_failure_is_a_server_error(self, client, monkeypatch, endpoint):
        def fail(*args, **kwargs):
            raise InvariantViolation("emitted derivative has the wrong type")

        monkeypatch.setattr(api.pipeline, "check_output", fail)
        monkeypatch.setattr(api.pipeline, "jacobian_report", fail)
        response = client.post(f"/api/v1/programs/{endpoint}", json={"source": PRODUCT, "point": [1.0, 1.0]})
        assert response.status_code == 500
        assert response.json()["detail"] == "emitted derivative has the wrong type"
