from __future__ import annotations

import shutil
from pathlib import Path

import pytest

from socnavgen.llm_gateway import ChatRequest, ChatResponse, LLMGateway
from socnavgen.scene_graph import load_scene_graph

REPO = Path(__file__).resolve().parents[1]
ASSETS = REPO / "assets"
FIXTURES = REPO / "fixtures"


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return REPO


@pytest.fixture(scope="session")
def warehouse_graph_file() -> Path:
    return ASSETS / "maps" / "warehouse" / "scenegraph.json"


@pytest.fixture(scope="session")
def office_graph_file() -> Path:
    return ASSETS / "maps" / "office" / "scenegraph.json"


@pytest.fixture(scope="session")
def corridor_graph_file() -> Path:
    return ASSETS / "maps" / "corridor" / "scenegraph.json"


@pytest.fixture()
def warehouse_graph(warehouse_graph_file):
    return load_scene_graph(warehouse_graph_file)


@pytest.fixture()
def corridor_graph(corridor_graph_file):
    return load_scene_graph(corridor_graph_file)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES / "llm"


@pytest.fixture()
def replay_gateway(fixtures_dir) -> LLMGateway:
    def no_network(req: ChatRequest) -> ChatResponse:
        raise AssertionError("replay mode must not touch the transport")

    return LLMGateway(mode="replay", fixtures_dir=fixtures_dir, transport=no_network)


class ScriptedTransport:
    """Pops canned response texts in order; records every request it sees."""

    def __init__(self, texts: list[str]):
        self.texts = list(texts)
        self.requests: list[ChatRequest] = []

    def __call__(self, req: ChatRequest) -> ChatResponse:
        self.requests.append(req)
        if not self.texts:
            raise AssertionError("scripted transport ran out of responses")
        return ChatResponse(text=self.texts.pop(0), input_tokens=10,
                            output_tokens=5, latency=0.01)


@pytest.fixture()
def scripted_gateway_factory(tmp_path):
    def make(texts: list[str], mode: str = "record") -> LLMGateway:
        return LLMGateway(mode=mode, fixtures_dir=tmp_path / "fx",
                          transport=ScriptedTransport(texts))

    return make


def copy_bundle(src: Path, dst: Path) -> Path:
    shutil.copytree(src, dst)
    return dst


@pytest.fixture(scope="session")
def bundle_fixture_dir() -> Path:
    return FIXTURES / "bundles"
