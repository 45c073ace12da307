"""Unit tests for configuration loading and validation"""

import pytest

from src.data.defaults import ACCEPTANCE_CONFIGS, acceptance_config
from src.models.errors import ConfigurationError
from src.utils.validation import YamlConfigLoader, build_config, suggest, validate_document


class TestYamlLoader:
    """Test reading configuration files"""

    def test_load_mapping(self, tmp_path):
        """Test a plain mapping is returned as a dict"""
        path = tmp_path / "run.yaml"
        path.write_text("experiment: exit-time\nindices: [1.0, 1.5]\nseed: 3\n", encoding="utf-8")
        assert YamlConfigLoader().load(path) == {"experiment": "exit-time", "indices": [1.0, 1.5], "seed": 3}

    def test_empty_file(self, tmp_path):
        """Test an empty file loads as an empty mapping"""
        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")
        assert YamlConfigLoader().load(path) == {}

    def test_syntax_error_position(self, tmp_path):
        """Test YAML errors carry the line of the problem"""
        path = tmp_path / "bad.yaml"
        path.write_text("experiment: exit-time\nindices: [1.0, 1.5\nseed: 3\n", encoding="utf-8")
        with pytest.raises(ConfigurationError) as info:
            YamlConfigLoader().load(path)
        assert "line" in str(info.value)

    def test_top_level_list(self, tmp_path):
        """Test a non-mapping top level is rejected"""
        path = tmp_path / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="mapping"):
            YamlConfigLoader().load(path)

    def test_missing_file(self, tmp_path):
        """Test unreadable paths are configuration errors"""
        with pytest.raises(ConfigurationError):
            YamlConfigLoader().load(tmp_path / "nope.yaml")


class TestSuggestions:
    """Test fuzzy key suggestions"""

    def test_close_key(self):
        """Test a typo gets a suggestion"""
        assert suggest("r_lst", ["r_list", "x0", "center"]) == " (did you mean 'r_list'?)"

    def test_no_close_key(self):
        """Test unrelated keys get no suggestion"""
        assert suggest("zzzz", ["r_list"]) == ""
        assert suggest("anything", []) == ""


class TestValidateDocument:
    """Test collected diagnostics"""

    @pytest.mark.parametrize("experiment", sorted(ACCEPTANCE_CONFIGS))
    def test_acceptance_configs_valid(self, registry, experiment):
        """Test every documented configuration passes"""
        assert validate_document(acceptance_config(experiment), registry) == []

    def test_empty_document(self, registry):
        """Test the required top-level fields are all reported"""
        problems = validate_document({}, registry)
        assert "experiment: required field missing" in problems
        assert "indices: required field missing" in problems
        assert "seed: required field missing" in problems

    def test_index_at_two(self, registry):
        """Test α = 2 is outside the open interval"""
        document = acceptance_config("exit-time")
        document["indices"] = [1.0, 2.0]
        problems = validate_document(document, registry)
        assert any("indices[1]" in p and "open interval (0,2)" in p for p in problems)

    def test_single_index(self, registry):
        """Test at least two drivers are needed"""
        document = acceptance_config("exit-time")
        document["indices"] = [1.0]
        assert any(p.startswith("indices:") for p in validate_document(document, registry))

    def test_jump_exit_hypothesis(self, registry):
        """Test R < 2r is reported with the offending value"""
        document = acceptance_config("jump-exit", R_list=[0.15, 0.4])
        problems = validate_document(document, registry)
        assert problems == ["params: R_list: R=0.15 violates the hypothesis R ≥ 2r (r=0.1)"]

    def test_corner_hit_hypotheses(self, registry):
        """Test δ below ε and ε above a quarter of r^(α_max/α_min) are rejected"""
        problems = validate_document(acceptance_config("corner-hit", eps=0.2, delta=0.1), registry)
        assert problems == ["params: delta: must lie strictly between eps and r^(α_max/α_min)/2=0.5"]
        problems = validate_document(acceptance_config("corner-hit", eps=0.3, delta=0.4), registry)
        assert problems == ["params: eps: must stay below r^(α_max/α_min)/4=0.25"]

    def test_unknown_experiment_suggestion(self, registry):
        """Test misspelt experiment names get a suggestion"""
        document = acceptance_config("exit-time")
        document["experiment"] = "exit-tme"
        problems = validate_document(document, registry)
        assert any("did you mean 'exit-time'" in p for p in problems)

    def test_unknown_param(self, registry):
        """Test unknown parameter keys are reported with a suggestion"""
        document = acceptance_config("exit-time")
        document["params"]["r_lst"] = [0.1]
        problems = validate_document(document, registry)
        assert any(p.startswith("params.r_lst: unknown key") and "r_list" in p for p in problems)

    def test_missing_required_param(self, registry):
        """Test a missing required parameter"""
        document = acceptance_config("exit-time")
        del document["params"]["r_list"]
        assert "params.r_list: required field missing" in validate_document(document, registry)

    def test_all_problems_collected(self, registry):
        """Test validation does not stop at the first problem"""
        document = acceptance_config("exit-time")
        document["seed"] = -1
        document["threads"] = 0
        document["sampling"] = {"n_paths": 0, "grdi": 0.1}
        document["indices"] = [1.0, 2.5]
        problems = validate_document(document, registry)
        assert len(problems) >= 5

    def test_bad_vector_dimension(self, registry):
        """Test points must match the number of drivers"""
        document = acceptance_config("exit-time", x0=[0.0, 0.0, 0.0])
        assert any("params.x0" in p for p in validate_document(document, registry))

    def test_bad_coefficients(self, registry):
        """Test unknown presets and singular matrices"""
        document = acceptance_config("exit-time")
        document["coefficients"] = {"preset": "rotaton"}
        assert any("did you mean 'rotation'" in p for p in validate_document(document, registry))
        document["coefficients"] = {"preset": "constant", "matrix": [[1.0, 2.0], [2.0, 4.0]]}
        assert any(p.startswith("coefficients:") for p in validate_document(document, registry))

    def test_bad_field(self, registry):
        """Test scalar field specs are built during validation"""
        document = acceptance_config("harmonic", g={"kind": "nonsense"})
        assert any(p.startswith("params.g:") for p in validate_document(document, registry))

    def test_bad_quadrature(self, registry):
        """Test quadrature cut-offs are checked"""
        document = acceptance_config("dynkin")
        document["quadrature"] = {"inner_cut": 2.0}
        assert any(p.startswith("quadrature:") for p in validate_document(document, registry))


class TestBuildConfig:
    """Test resolved configurations"""

    def test_defaults_merged(self, registry):
        """Test optional parameters get their defaults"""
        config = build_config(acceptance_config("landing-profile"), registry)
        assert config.params["depth"] == 4
        assert config.params["x0"] is None
        assert config.coefficients.preset == "identity"
        assert config.threads >= 1

    def test_overrides(self, registry, tmp_path):
        """Test command-line overrides for seed, threads, output and plot"""
        config = build_config(acceptance_config("exit-time"), registry,
                              {"seed": 99, "threads": 3, "out": tmp_path, "plot": True})
        assert config.seed == 99
        assert config.threads == 3
        assert config.output.directory == str(tmp_path)
        assert config.output.plot

    def test_invalid_raises_with_diagnostics(self, registry):
        """Test every diagnostic travels with the error"""
        with pytest.raises(ConfigurationError) as info:
            build_config({"experiment": "exit-time"}, registry)
        assert len(info.value.diagnostics) >= 3

    def test_round_trip_dict(self, registry):
        """Test the resolved config echoes indices and coefficients"""
        config = build_config(acceptance_config("dynkin"), registry)
        echoed = config.to_dict()
        assert echoed["indices"] == [1.0, 1.5]
        assert echoed["coefficients"]["preset"] == "rotation"
