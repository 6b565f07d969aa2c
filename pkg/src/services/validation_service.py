"""
Validation Service - Literal parsing and validation for the command line

Field literals ("Q", "d=-1"), element literals ("x,y" or "x" over Q),
cone literals (generators joined by ';', several cones joined by '|'),
exponent matrices (rows joined by ';', entries by ',') and run options.
"""

import re
from typing import List, Optional, Tuple

from services.cone_service import Cone
from services.errors import MdzError
from services.field_service import FieldElement, QuadField
from services.mdzv_service import ExponentMatrix


class ValidationService:
    """
    Service class for validating user literals.

    validate_* return (is_valid, error_message); parse_* raise ValueError
    with the same message.
    """

    FIELD_PATTERN = re.compile(r'^\s*(?:Q|d\s*=\s*(-?\d+))\s*$')
    INTEGER_PATTERN = re.compile(r'^\s*-?\d+\s*$')

    FORMATS = ('json', 'csv', 'text')
    MODES = ('sum', 'quadrature')

    @classmethod
    def validate_field(cls, literal: Optional[str]) -> Tuple[bool, str]:
        """
        Validate a field literal.

        Args:
            literal: "Q" or "d=<squarefree integer>"

        Returns:
            Tuple of (is_valid: bool, error_message: str)
        """
        if not literal:
            return False, "Field literal is required"
        match = cls.FIELD_PATTERN.match(literal)
        if not match:
            return False, f"Invalid field literal '{literal}' (expected Q or d=<int>)"
        if match.group(1) is None:
            return True, ""
        try:
            QuadField.quadratic(int(match.group(1)))
        except MdzError as e:
            return False, str(e)
        return True, ""

    @classmethod
    def parse_field(cls, literal: str) -> QuadField:
        ok, message = cls.validate_field(literal)
        if not ok:
            raise ValueError(message)
        d = cls.FIELD_PATTERN.match(literal).group(1)
        return QuadField.rationals() if d is None else QuadField.quadratic(int(d))

    @classmethod
    def parse_element(cls, f: QuadField, literal: str) -> FieldElement:
        """
        Parse "x,y" (x + y*omega), or "x" over Q.

        Args:
            f: Field the element belongs to
            literal: Coordinate literal

        Returns:
            FieldElement
        """
        parts = [p.strip() for p in literal.split(',')]
        expected = f.degree
        if len(parts) != expected or not all(cls.INTEGER_PATTERN.match(p) for p in parts):
            shape = "x" if expected == 1 else "x,y"
            raise ValueError(f"Invalid element literal '{literal}' (expected {shape})")
        coords = [int(p) for p in parts]
        return f.element(coords[0], coords[1] if expected == 2 else 0)

    @classmethod
    def parse_cone(cls, f: QuadField, literal: str) -> Cone:
        if not literal or not literal.strip():
            raise ValueError("Cone literal cannot be empty")
        gens = [cls.parse_element(f, part) for part in literal.split(';')]
        try:
            return Cone.of(f, *gens)
        except MdzError as e:
            raise ValueError(str(e)) from e

    @classmethod
    def parse_cones(cls, f: QuadField, literal: str) -> List[Cone]:
        """Several cones joined by '|'."""
        if not literal or not literal.strip():
            raise ValueError("Cone list cannot be empty")
        return [cls.parse_cone(f, part) for part in literal.split('|')]

    @classmethod
    def validate_cones(cls, f: QuadField, literal: str) -> Tuple[bool, str]:
        try:
            cls.parse_cones(f, literal)
        except ValueError as e:
            return False, str(e)
        return True, ""

    @classmethod
    def parse_exponents(cls, literal: str) -> ExponentMatrix:
        """
        Parse an exponent matrix literal such as "1,2;1,2" or "2.5+1j".

        Returns:
            ExponentMatrix with one row per embedding
        """
        if not literal or not literal.strip():
            raise ValueError("Exponent matrix cannot be empty")
        rows = []
        for row in literal.split(';'):
            entries = []
            for entry in row.split(','):
                text = entry.strip().replace(' ', '')
                try:
                    entries.append(complex(text))
                except ValueError:
                    raise ValueError(f"Invalid exponent '{entry.strip()}'") from None
            rows.append(tuple(entries))
        try:
            return ExponentMatrix(tuple(rows))
        except MdzError as e:
            raise ValueError(str(e)) from e

    @classmethod
    def validate_exponents(cls, literal: str) -> Tuple[bool, str]:
        try:
            cls.parse_exponents(literal)
        except ValueError as e:
            return False, str(e)
        return True, ""

    @classmethod
    def validate_bound(cls, bound: Optional[int]) -> Tuple[bool, str]:
        if bound is None:
            return True, ""
        if not isinstance(bound, int) or isinstance(bound, bool):
            return False, "Coefficient bound must be an integer"
        if bound < 1:
            return False, "Coefficient bound must be at least 1"
        return True, ""

    @classmethod
    def validate_tol(cls, tol: float) -> Tuple[bool, str]:
        if not isinstance(tol, (int, float)) or not tol > 0:
            return False, "Tolerance must be a positive number"
        return True, ""

    @classmethod
    def validate_threads(cls, threads: int) -> Tuple[bool, str]:
        if not isinstance(threads, int) or isinstance(threads, bool) or threads < 1:
            return False, "Thread count must be a positive integer"
        return True, ""

    @classmethod
    def validate_format(cls, fmt: str) -> Tuple[bool, str]:
        if fmt not in cls.FORMATS:
            return False, f"Output format must be one of {', '.join(cls.FORMATS)}"
        return True, ""

    @classmethod
    def validate_mode(cls, mode: str) -> Tuple[bool, str]:
        if mode not in cls.MODES:
            return False, f"Mode must be one of {', '.join(cls.MODES)}"
        return True, ""
