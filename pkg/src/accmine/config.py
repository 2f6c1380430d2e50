"""Pipeline configuration: one YAML or JSON file, overridable from the command line."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from accmine.curate import DEFAULT_RATIO, DEFAULT_SEED
from accmine.errors import AccmineError
from accmine.ingest import RemoteSettings
from accmine.mcu import CompilerConfig


class ConfigError(AccmineError):
    pass


@dataclass
class CompilerSection:
    executable: str = "nvc"
    cxx_executable: str | None = None
    base_flags: list[str] = field(default_factory=lambda: ["-c"])
    acc_flags: list[str] = field(default_factory=lambda: ["-acc", "-Minfo=accel"])
    timeout: float = 60.0

    def build(self, workdir: str | None = None) -> CompilerConfig:
        return CompilerConfig(self.executable, tuple(self.base_flags), tuple(self.acc_flags), self.timeout, workdir,
                              self.cxx_executable)


@dataclass
class RemoteSection:
    endpoint: str = RemoteSettings.endpoint
    page_limit: int = 10
    page_size: int = 100
    max_retries: int = 5
    backoff_start: float = 2.0
    timeout: float = 30.0

    def build(self) -> RemoteSettings:
        return RemoteSettings(endpoint=self.endpoint, page_size=self.page_size, max_retries=self.max_retries,
                              backoff_start=self.backoff_start, timeout=self.timeout)


@dataclass
class PipelineConfig:
    corpus: str | None = None
    snapshot: str | None = None
    out: str = "out"
    ratio: float = DEFAULT_RATIO
    seed: int = DEFAULT_SEED
    jobs: int = 1
    system_prompt: str | None = None
    compiler: CompilerSection = field(default_factory=CompilerSection)
    remote: RemoteSection = field(default_factory=RemoteSection)

    def __post_init__(self):
        if not 0 < self.ratio < 1:
            raise ConfigError(f"ratio must lie strictly between 0 and 1, got {self.ratio}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.compiler.timeout <= 0:
            raise ConfigError("compiler timeout must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        sections = {"compiler": CompilerSection, "remote": RemoteSection}
        kwargs = {}
        for name, section in sections.items():
            if name in d:
                kwargs[name] = _build(section, d.pop(name) or {}, name)
        kwargs.update(_checked(cls, d, "config"))
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def provenance(self) -> dict:
        """Effective settings echoed into outputs; the output directory is left out."""
        d = self.to_dict()
        d.pop("out")
        return d

    def with_overrides(self, **overrides) -> "PipelineConfig":
        """Copy with every non-None override applied; ``compiler_*`` keys go to the compiler section."""
        d = self.to_dict()
        for key, value in overrides.items():
            if value is None:
                continue
            if key.startswith("compiler_"):
                d["compiler"][key[len("compiler_"):]] = value
            else:
                d[key] = value
        return PipelineConfig.from_dict(d)


def _checked(cls, d: dict, where: str) -> dict:
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(d) - known)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    return d


def _build(cls, d: dict, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"section '{where}' must be a mapping")
    return cls(**_checked(cls, d, where))


def load_config(path: str | Path | None) -> PipelineConfig:
    """Read a YAML or JSON config file; ``None`` gives the defaults."""
    if path is None:
        return PipelineConfig()
    try:
        data = yaml.safe_load(Path(path).read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if data is None:
        return PipelineConfig()
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    try:
        return PipelineConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
