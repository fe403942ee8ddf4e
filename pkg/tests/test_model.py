import pytest
from hypothesis import given, strategies as st

import variantsim as vs
from variantsim.model import ParameterRange, ParameterValues


def upscaling_dimensions():
    return vs.AdaptationDimensions(
        auxiliary_data=("psnr-large", "psnr-small", "noise-cancel", "gans")
    )


class TestEnumerateVariants:
    def test_algorithms_only(self):
        dims = vs.AdaptationDimensions(algorithms=("a", "b"))
        variants = vs.enumerate_variants(dims)
        assert len(variants) == 2
        assert {v.algorithm for v in variants} == {"a", "b"}
        assert all(v.aux_data is None for v in variants)

    def test_algorithm_times_parameter_grid(self):
        dims = vs.AdaptationDimensions(
            algorithms=("lbp", "haar"),
            parameters={"min-neighbors": ParameterRange(1, 10, 1)},
        )
        variants = vs.enumerate_variants(dims)
        assert len(variants) == 20  # 2 x 10

    def test_aux_data_only(self):
        variants = vs.enumerate_variants(upscaling_dimensions())
        assert len(variants) == 4
        assert {v.aux_data for v in variants} == {
            "psnr-large", "psnr-small", "noise-cancel", "gans"
        }

    def test_float_grid_has_exact_point_count(self):
        dims = vs.AdaptationDimensions(
            parameters={"scale-factor": ParameterRange(1.0, 1.9, 0.1)}
        )
        assert len(vs.enumerate_variants(dims)) == 10

    def test_continuous_domain_is_not_enumerable(self):
        dims = vs.AdaptationDimensions(
            parameters={"quality": ParameterRange(0.0, 1.0, step=None)}
        )
        with pytest.raises(ValueError, match="non-enumerable parameter space"):
            vs.enumerate_variants(dims)

    def test_all_empty_dimensions_collapse_to_one_variant(self):
        variants = vs.enumerate_variants(vs.AdaptationDimensions())
        assert len(variants) == 1
        assert variants[0].algorithm is None and variants[0].aux_data is None

    @given(
        n_algo=st.integers(0, 4),
        n_aux=st.integers(0, 3),
        grid_sizes=st.lists(st.integers(1, 5), min_size=0, max_size=3),
    )
    def test_count_is_product_and_ids_unique(self, n_algo, n_aux, grid_sizes):
        dims = vs.AdaptationDimensions(
            algorithms=tuple(f"a{i}" for i in range(n_algo)),
            parameters={
                f"p{i}": ParameterValues(tuple(range(size)))
                for i, size in enumerate(grid_sizes)
            },
            auxiliary_data=tuple(f"d{i}" for i in range(n_aux)),
        )
        variants = vs.enumerate_variants(dims)
        expected = max(n_algo, 1) * max(n_aux, 1)
        for size in grid_sizes:
            expected *= size
        assert len(variants) == expected
        assert len({v.variant_id for v in variants}) == len(variants)

    @given(
        n_algo=st.integers(1, 3),
        grid=st.lists(st.integers(0, 9), min_size=1, max_size=4, unique=True),
    )
    def test_enumerated_variants_validate_against_owning_spec(self, n_algo, grid):
        dims = vs.AdaptationDimensions(
            algorithms=tuple(f"a{i}" for i in range(n_algo)),
            parameters={"k": ParameterValues(tuple(grid))},
        )
        variants = vs.enumerate_variants(dims)
        spec = vs.MicroserviceSpec(
            service_id="svc",
            dimensions=dims,
            variants=tuple(
                (v, vs.VariantProfile(v.variant_id, 1_000, 0.5)) for v in variants
            ),
            initial_variant=variants[0].variant_id,
        )
        assert vs.validate_spec(spec).ok


class TestValidateSpec:
    def make_spec(self, variants, initial="v1"):
        dims = vs.AdaptationDimensions(
            algorithms=("haar", "lbp"),
            parameters={"scale-factor": ParameterRange(1.0, 1.9, 0.1)},
        )
        return vs.MicroserviceSpec(
            service_id="svc", dimensions=dims, variants=variants, initial_variant=initial
        )

    def test_duplicate_variant_id_reported(self):
        v = vs.ServiceVariant("v1", algorithm="haar")
        p = vs.VariantProfile("v1", 70_000, 0.5)
        report = vs.validate_spec(self.make_spec(((v, p), (v, p))))
        assert not report.ok
        assert any("duplicate id 'v1'" in issue.message for issue in report.issues)

    def test_out_of_domain_parameter_reported(self):
        v = vs.ServiceVariant("v1", algorithm="haar", parameters={"scale-factor": 2.5})
        p = vs.VariantProfile("v1", 70_000, 0.5)
        report = vs.validate_spec(self.make_spec(((v, p),)))
        assert not report.ok
        assert any("scale-factor" in issue.path and "outside" in issue.message
                   for issue in report.issues)

    def test_well_formed_face_detection_spec_passes(self):
        variants = (
            (vs.ServiceVariant("haar", algorithm="haar", parameters={"scale-factor": 1.2}),
             vs.VariantProfile("haar", 70_000, 0.67)),
            (vs.ServiceVariant("lbp", algorithm="lbp", parameters={"scale-factor": 1.2}),
             vs.VariantProfile("lbp", 45_000, 0.57)),
        )
        report = vs.validate_spec(self.make_spec(variants, initial="haar"))
        assert report.ok, str(report)

    def test_unknown_algorithm_and_initial_variant(self):
        v = vs.ServiceVariant("v1", algorithm="surf")
        p = vs.VariantProfile("v1", 70_000, 0.5)
        report = vs.validate_spec(self.make_spec(((v, p),), initial="nope"))
        paths = {issue.path for issue in report.issues}
        assert any(path.endswith(".algorithm") for path in paths)
        assert any(path.endswith(".initial_variant") for path in paths)

    def test_bad_profile_values(self):
        v = vs.ServiceVariant("v1", algorithm="haar")
        p = vs.VariantProfile("v1", 0, 1.5)
        report = vs.validate_spec(self.make_spec(((v, p),)))
        messages = [str(issue) for issue in report.issues]
        assert any("service_time_us" in m for m in messages)
        assert any("qor" in m for m in messages)

    def test_empty_variant_list(self):
        report = vs.validate_spec(self.make_spec(()))
        assert any("at least one variant" in issue.message for issue in report.issues)

    def test_malformed_parameter_domain(self):
        dims = vs.AdaptationDimensions(
            parameters={"bad": ParameterRange(2.0, 1.0, 0.1)}
        )
        spec = vs.MicroserviceSpec(
            service_id="svc",
            dimensions=dims,
            variants=((vs.ServiceVariant("v"), vs.VariantProfile("v", 1, 0.5)),),
            initial_variant="v",
        )
        report = vs.validate_spec(spec)
        assert any("malformed domain" in issue.message for issue in report.issues)
