"""taskchat: an end-to-end task-completion dialogue platform.

Frame-DSL dialog acts, domain schemas, JSON knowledge bases, an agenda-based
user simulator, rule-based and RL dialogue agents, a simulation-evaluation
harness, and an HTTP judging service with a browser chat UI.
"""

from .agents import (AgentAction, DialogueState, RewardConfig, RLAgent, RuleAgent,
                     bind_action, feasible_actions, feature_size, featurize, reward, track)
from .corpus import (AnnotatedDialogue, AnnotatedTurn, CorpusStats, ValidationReport,
                     corpus_stats, extract_goals_aggregate, extract_goals_first_turn,
                     load_corpus, validate_corpus)
from .errors import (CheckpointError, EmptyGoalSet, EmptyReport, GoalError, KbFormatError,
                     ParseError, ProtocolError, SchemaError, ServiceError, TaskchatError,
                     TrainingDiverged, ValidationError)
from .frames import (ANYTHING, UNK, DialogAct, SlotValue, Violation, format_value,
                     is_anything, parse_frame, serialize_frame, slot_value, validate_act)
from .goals import UserGoal, goal_from_json, goal_to_json, load_goal_db, write_goal_db
from .harness import (FRAME, NATURAL_LANGUAGE, CurvePoint, EpisodeRecord, Metrics, Report,
                      TrainSchedule, curve_to_csv, evaluate, report, run_episode,
                      summarize, train)
from .kb import KbRecord, KnowledgeBase, available_values, load_kb, query, satisfies, top_value
from .nl import TemplateTable, build_lexicon, builtin_templates, load_templates, nlg_render, nlu_parse
from .qnet import (QFunction, ReplayBuffer, TabularQ, compute_grads, load_checkpoint,
                   save_checkpoint, schema_hash, select_action, train_step)
from .schema import BUILTIN_DOMAINS, DomainSchema, builtin_schema, load_schema, resource_text
from .simulator import (FAILURE, ONGOING, SUCCESS, TASKCOMPLETE, SimConfig, SimState,
                        UserSimulator, clone_state, record_agent_act, sample_goal)
from .worldgen import gen_goal_db, gen_movie_kb, movie_titles

__version__ = "0.1.0"
