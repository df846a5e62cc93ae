# Scrapy settings for the bellsim project
#
# Every value here is a project default. A JSON config document passed with
# --config overrides these, and individual command-line flags override both.
# Setting precedence follows scrapy.settings priorities:
#
#     https://docs.scrapy.org/en/latest/topics/settings.html

BOT_NAME = "bellsim"

# No spiders live in this project; commands are the only entry points
SPIDER_MODULES = []
COMMANDS_MODULE = "bellsim.commands"

# Packages walked for MeasurementModel subclasses, the same way Scrapy walks
# SPIDER_MODULES for spiders
MODEL_MODULES = ["bellsim.models"]

# Logging is configured by Scrapy from these settings
LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s [%(name)s] %(levelname)s: %(message)s"

# Model and particle kind: qm | lhv-sign | algebraic, spin | photon
MODEL = "qm"
KIND = "spin"

# Trials per correlation estimate and the master seed
TRIALS = 100000
SEED = 20110106

# Sweep grid in degrees, either "start:stop:step" (stop inclusive) or a
# comma separated list
ANGLES = "0:180:15"
SWEEP_METHOD = "monte-carlo"

# CHSH settings as four analyzer angles in degrees (a, a', b, b').
# Empty means the canonical quadruple for the particle kind.
CHSH_ANGLES = ""

# Settings (a, b) in degrees for the locality command; equal angles give the
# matched-setting run
LOCALITY_ANGLES = "0,0"
# fixed: the two settings above on every trial
# chsh: each station picks one of its two CHSH settings per trial
LOCALITY_SETTINGS = "fixed"

# Trial schedule: station separation L (signal speed c = 1) and event times.
# Two values mean "choose,measure" for both stations, four values mean
# "choose_a,choose_b,measure_a,measure_b"; emission is always at t = 0.
SCHEDULE_L = 1.0
SCHEDULE_TIMES = "0.5,0.9"
# Refuse schedules whose measurements are not spacelike separated instead of
# flagging them in the result
LOCALITY_REQUIRE_SPACELIKE = False
# Optional path for the JSON causal log export
LOCALITY_LOG = ""

# Worker threads. Trials are partitioned into BLOCK_SIZE blocks with one
# random sub-stream each, so results do not depend on THREADS.
THREADS = 1
BLOCK_SIZE = 65536

# Optional SVG plot for sweeps
PLOT = ""

# Wall-clock duration is always logged; writing it into result documents
# makes otherwise identical runs differ byte-wise
RECORD_DURATION = False

# Configure result pipelines, applied in ascending order before export
RESULT_PIPELINES = {
    "bellsim.pipelines.NormalisationPipeline": 300,
    "bellsim.pipelines.ValidationPipeline": 400,
}

# Set settings whose default value is deprecated to a future-proof value
FEED_EXPORT_ENCODING = "utf-8"
