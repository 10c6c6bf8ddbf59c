"""Column-role mapping from a source file to the canonical cohort layout."""

from __future__ import annotations

from pydantic import BaseModel, Field

from prepadj.core.constants import (
    ASSESSED,
    COHORT,
    DECISION,
    DEFAULT_REFERENCE_GROUP,
    GROUP,
    PASSED,
    ROLE_COLUMNS,
    STRATUM,
    UNIT_ID,
)
from prepadj.core.exceptions import SchemaError

COVARIATE_TYPES = ("numeric", "categorical")


class ColumnSchema(BaseModel):
    """Maps source column names to roles. Remaining columns are typed covariates."""

    unit_id: str | None = Field(default=UNIT_ID)
    group: str = GROUP
    stratum: str = STRATUM
    decision: str = DECISION
    assessed: str = ASSESSED
    passed: str = PASSED
    cohort: str = COHORT
    covariates: dict[str, str] = Field(default_factory=dict)
    reference_group: str = DEFAULT_REFERENCE_GROUP

    def role_map(self) -> dict[str, str]:
        """Source column -> canonical name for the role columns."""
        roles = {
            self.group: GROUP,
            self.stratum: STRATUM,
            self.decision: DECISION,
            self.assessed: ASSESSED,
            self.passed: PASSED,
            self.cohort: COHORT,
        }
        if self.unit_id:
            roles[self.unit_id] = UNIT_ID
        return roles

    def required_columns(self) -> list[str]:
        return [self.group, self.stratum, self.decision, self.assessed, self.passed, self.cohort]

    def check(self) -> None:
        """Reject unknown covariate types and covariates that shadow a role column."""
        sources = self.required_columns() + ([self.unit_id] if self.unit_id else [])
        shared = sorted({c for c in sources if sources.count(c) > 1})
        if shared:
            raise SchemaError(
                f"Two roles are mapped to the same source column {shared[0]!r}",
                column=shared[0],
            )
        roles = self.role_map()
        for name, kind in self.covariates.items():
            if kind not in COVARIATE_TYPES:
                raise SchemaError(
                    f"Column {name!r} has unknown type {kind!r}; expected one of {COVARIATE_TYPES}",
                    column=name,
                )
            if name == self.group:
                raise SchemaError(
                    f"Group column {name!r} cannot be a covariate (it is never a predictor)",
                    column=name,
                )
            if name in roles or name in ROLE_COLUMNS:
                raise SchemaError(f"Covariate {name!r} collides with a role column", column=name)

    @property
    def numeric(self) -> list[str]:
        return [c for c, k in self.covariates.items() if k == "numeric"]

    @property
    def categorical(self) -> list[str]:
        return [c for c, k in self.covariates.items() if k == "categorical"]
