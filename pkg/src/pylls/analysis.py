import time
from contextlib import contextmanager

from .discriminator import TrainConfig
from .errors import ConfigError, PyllsError, StageError

__all__ = ["AnalysisObject", "AnalysisOptions", "MODES", "STAGES"]

MODES = ("learned", "oracle", "naive")

STAGES = ("discriminate", "discretize", "tabularize", "factorize", "adjust", "evaluate")


class AnalysisObject:
    """
    A base class for objects that run the identification pipeline
    """

    def __init__(self, analysis_options=None, train_config=None):
        # Options for the calculation
        if analysis_options is None:
            self.options = AnalysisOptions()
        else:
            self.options = analysis_options

        # Options for the domain discriminator
        if train_config is None:
            self.train_config = TrainConfig()
        else:
            self.train_config = train_config

        self.timings = {}
        self.results_valid = False

    def init_run(self):
        """
        Derived classes call this at top of their run()
        """
        self.timings = {}
        self.results_valid = False

        if self.options.getPrintOutput():
            print("==================================================")
            print("")
            print("        RUNNING LATENT LABEL SHIFT ANALYSIS")
            print("")
            print("==================================================")
            print("")
            print(f" Mode: {self.options.getMode()}")
            print("")

    @contextmanager
    def stage(self, name):
        """
        Time a pipeline stage and tag any failure inside it with its name
        """
        if self.options.getPrintOutput():
            print(f" Stage: {name}")
        start = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except (PyllsError, ArithmeticError, ValueError) as e:
            raise StageError(name, e) from e
        finally:
            self.timings[name] = time.perf_counter() - start


class AnalysisOptions:
    """Options

    Options for the latent label shift pipeline.
    """

    def __init__(self, **kwargs):
        self.mode = "learned"
        """Source of the domain posteriors

        :Values:
          - 'learned': trained discriminator,\n
          - 'oracle': exact posteriors of a synthetic instance,\n
          - 'naive': feature-independent Gaussian noise, no discriminator
        """

        self.discretizer = None
        """Discretization of the domain posteriors

        :Values:
          - 'kmeans': Lloyd clustering,\n
          - 'point_mass': grouping of exactly repeated posteriors,\n
          - None: 'point_mass' in oracle mode, 'kmeans' otherwise

        Exact oracle posteriors take finitely many values, which
        'point_mass' groups without choosing a cluster count. k-means is the
        practical path for learned posteriors and can be set explicitly in
        oracle mode too.
        """

        self.n_clusters = None
        """Number of k-means clusters, defaults to the problem's m"""

        self.niter = 100
        """Lloyd iterations per k-means restart"""

        self.nredo = 5
        """k-means restarts"""

        self.factorizer = "nmf"
        """Factorization method: 'nmf' (multiplicative updates) or 'spa'"""

        self.nmf_max_iter = 2000
        """Iteration limit per NMF restart"""

        self.nmf_tol = 1e-9
        """Residual at which NMF stops"""

        self.nmf_n_init = 10
        """NMF restarts"""

        self.allow_overcomplete = False
        """Accept fewer clusters than classes in the factorization"""

        self.point_mass_epsilon = 0.01
        """Smallest empirical mass of a labeled point-mass group"""

        self.match_tol = 1e-9
        """Posteriors closer than this are the same point mass"""

        self.naive_dim = None
        """Dimension of the naive representation, defaults to r"""

        self.seed = None
        """Seed of the clustering, factorization and representation streams,
        defaults to the problem seed"""

        self.print_output = False
        """Print output to the console during calculation

        :Values:
          - True: prints stage names and a result summary,\n
          - False: silent
        """

        for key, value in kwargs.items():
            if not hasattr(self, key):
                raise ConfigError("unknown option", key=key)
            setattr(self, key, value)
        self._check_input()

    def __repr__(self):
        return f"AnalysisOptions({', '.join(f'{k}={v!r}' for k, v in self.to_dict().items())})"

    def _check_input(self):
        if self.mode not in MODES:
            raise ConfigError(f"must be one of {MODES}, got {self.mode!r}", key="mode")
        if self.discretizer not in (None, "kmeans", "point_mass"):
            raise ConfigError(f"unknown discretizer {self.discretizer!r}", key="discretizer")
        if self.factorizer not in ("nmf", "spa"):
            raise ConfigError(f"unknown factorizer {self.factorizer!r}", key="factorizer")
        if self.n_clusters is not None and self.n_clusters < 1:
            raise ConfigError("must be positive", key="n_clusters")
        for key in ("niter", "nredo", "nmf_max_iter", "nmf_n_init"):
            if getattr(self, key) < 1:
                raise ConfigError("must be positive", key=key)
        if not self.point_mass_epsilon > 0:
            raise ConfigError("must be positive", key="point_mass_epsilon")

    def to_dict(self):
        return {
            "mode": self.mode,
            "discretizer": self.discretizer,
            "n_clusters": self.n_clusters,
            "niter": self.niter,
            "nredo": self.nredo,
            "factorizer": self.factorizer,
            "nmf_max_iter": self.nmf_max_iter,
            "nmf_tol": self.nmf_tol,
            "nmf_n_init": self.nmf_n_init,
            "allow_overcomplete": self.allow_overcomplete,
            "point_mass_epsilon": self.point_mass_epsilon,
            "match_tol": self.match_tol,
            "naive_dim": self.naive_dim,
            "seed": self.seed,
            "print_output": self.print_output,
        }

    # getter
    def getPrintOutput(self):
        return self.print_output

    def getMode(self):
        return self.mode

    def getDiscretizer(self):
        if self.discretizer is None:
            return "point_mass" if self.mode == "oracle" else "kmeans"
        return self.discretizer

    def getClusters(self):
        return self.n_clusters

    def getFactorizer(self):
        return self.factorizer

    def getSeed(self):
        return self.seed

    # setter
    def setPrintOutput(self, tof):
        self.print_output = tof

    def setMode(self, mode):
        self.mode = mode
        self._check_input()

    def setDiscretizer(self, discretizer):
        self.discretizer = discretizer
        self._check_input()

    def setClusters(self, n_clusters):
        self.n_clusters = n_clusters
        self._check_input()

    def setFactorizer(self, factorizer):
        self.factorizer = factorizer
        self._check_input()

    def setSeed(self, seed):
        self.seed = seed
