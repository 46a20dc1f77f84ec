from datetime import datetime
from typing import Any, List, Optional

from pydantic import BaseModel, ConfigDict


class Artifact(BaseModel):
    """Артефакт запуска из БД"""

    role: str
    path: str
    digest: str

    model_config = ConfigDict(from_attributes=True)


class Run(BaseModel):
    """Запуск стадии из БД со списком артефактов"""

    id: int
    stage: str
    seed: int
    config_digest: str
    status: str
    wall_time: float
    counters: dict[str, Any] = {}
    created_at: Optional[datetime] = None
    artifacts: List[Artifact] = []

    model_config = ConfigDict(from_attributes=True)

    def outputs(self) -> list[Artifact]:
        return [a for a in self.artifacts if a.role == "output"]
