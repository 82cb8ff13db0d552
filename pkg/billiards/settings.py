from contextlib import contextmanager

from pydantic import BaseModel, ConfigDict, Field


class Settings(BaseModel):
    """Session-wide numeric knobs. Exact (Fraction) arithmetic ignores all of them."""

    model_config = ConfigDict(frozen=True)

    tolerance: float = Field(default=1e-9, gt=0, description="float-backend equality, table units")
    angle_tolerance: float = Field(default=1e-9, gt=0, description="rational angle certification, radians")
    return_tolerance: float = Field(default=1e-6, gt=0, description="near-return threshold for float periods")
    perp_tolerance: float = Field(default=1e-9, gt=0, description="float perpendicularity test")


class _SettingsHolder:
    def __init__(self):
        self._current = Settings()

    def __getattr__(self, name):
        return getattr(self._current, name)

    def configure(self, **overrides) -> Settings:
        self._current = Settings(**{**self._current.model_dump(), **overrides})
        return self._current

    @contextmanager
    def context(self, **overrides):
        previous = self._current
        try:
            yield self.configure(**overrides)
        finally:
            self._current = previous


settings = _SettingsHolder()


def configure(**overrides) -> Settings:
    return settings.configure(**overrides)


def settings_context(**overrides):
    return settings.context(**overrides)
