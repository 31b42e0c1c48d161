"""The two judgements, the measurability restriction, and error cases."""

import numpy as np
import pytest

from conftest import random_measurable_ty
from sfpc import corpus
from sfpc.parser import parse
from sfpc.syntax import (
    BOOL,
    REAL,
    UNIT,
    FunTy,
    ProbTy,
    ProdTy,
    SumTy,
    ThunkTy,
    is_measurable,
    validate_ty,
)
from sfpc.typecheck import EMPTY_CTX, TyCtx, TypeCheckError, check_program, infer

NORM_REAL = SumTy((ProdTy(REAL, ProbTy(REAL)), UNIT, UNIT))


def ty_of(src: str, mode=None, ctx=EMPTY_CTX):
    t = parse(src)
    if mode is None:
        return check_program(t).ty
    return infer(mode, ctx, t)


class TestInference:
    def test_conditioning_body_is_bool(self):
        body = (
            "let x = sample(gauss(0.0, 3.0)) in"
            " score(density_gauss(5.0, (x, 1.0))); return(x < 4.5)"
        )
        assert ty_of(body, "p") == BOOL

    def test_reified_sampler_type(self):
        assert ty_of("\\x : P(real). thunk(sample(x))", "d") == FunTy(
            ProbTy(REAL), ThunkTy(REAL)
        )

    def test_norm_of_real_return(self):
        assert ty_of("norm(return(42.0))", "d") == NORM_REAL

    def test_force_of_thunk(self):
        assert ty_of("force(thunk(return(1.0)))", "p") == REAL

    def test_context_lookup_is_innermost(self):
        ctx = TyCtx((("x", REAL), ("x", BOOL)))
        assert infer("d", ctx, parse("x")) == BOOL

    def test_corpus_all_check(self):
        for name in corpus.ALL:
            corpus.checked(name)


class TestMeasurability:
    def test_examples(self):
        assert is_measurable(REAL)
        assert not is_measurable(ThunkTy(REAL))
        assert is_measurable(ProdTy(REAL, BOOL))
        assert not is_measurable(FunTy(REAL, REAL))
        assert is_measurable(ProbTy(ProdTy(REAL, REAL)))

    def test_prob_of_function_rejected(self):
        with pytest.raises(ValueError):
            validate_ty(ProbTy(FunTy(REAL, REAL)))

    def test_norm_over_thunk_rejected(self):
        with pytest.raises(TypeCheckError) as err:
            ty_of("norm(return(thunk(return(*))))")
        assert "measurable" in str(err.value)

    def test_lambda_annotation_with_bad_prob_rejected(self):
        with pytest.raises(TypeCheckError):
            ty_of("\\x : P(real -> real). return(*)", "d")


class TestErrors:
    @pytest.mark.parametrize(
        "src,mode,fragment",
        [
            ("x", "d", "unknown variable"),
            ("return(*)", "d", "expected a deterministic"),
            ("norm(norm(return(*)))", "d", "probabilistic"),
            ("sample(1.0)", "p", "non-distribution"),
            ("score(true)", "p", "expected real"),
            ("force(1.0)", "p", "non-thunk"),
            ("fst(1.0)", "d", "non-product"),
            ("(\\x : real. x) (true)", "d", "expected real"),
            ("1.0 (2.0)", "d", "non-function"),
            ("gauss(1.0)", "d", "no primitive gauss"),
            ("case true of { (0, a) => return(*) | (1, b) => return(1.0) }", "p", "differing"),
            ("(2, *) : (unit + unit)", "d", "out of range"),
            ("case (0, *) : (unit + unit + unit) of { (0, a) => 1.0 | (1, b) => 2.0 }", "d", "arms"),
        ],
    )
    def test_rejections(self, src, mode, fragment):
        with pytest.raises(TypeCheckError) as err:
            infer(mode, EMPTY_CTX, parse(src))
        assert fragment in str(err.value)

    def test_injection_payload_mismatch(self):
        with pytest.raises(TypeCheckError) as err:
            ty_of("(0, 1.0) : (unit + real)")
        assert "payload" in str(err.value)


class TestProperties:
    def test_inference_deterministic(self):
        for name in corpus.DISCRETE:
            cp = corpus.checked(name)
            again = infer(cp.mode, EMPTY_CTX, cp.term)
            assert again == cp.ty

    def test_weakening(self):
        """A check succeeding in ctx succeeds unchanged in any extension
        that does not capture free variables."""
        rng = np.random.default_rng(5)
        for name in corpus.DISCRETE:
            cp = corpus.checked(name)
            extra = TyCtx(
                tuple(
                    (f"w{i}", random_measurable_ty(rng, 1)) for i in range(3)
                )
            )
            assert infer(cp.mode, extra, cp.term) == cp.ty
