"""
管理命令的公共部分
公式读取、JSON 输出与退出码约定：0 表示 VALID/true/OK，1 表示 INVALID/false/存在问题，
2 表示输入错误（语法、片段、文件）。机器输出是 stdout 上的 JSON，给人看的摘要写到 stderr。
"""
import json
import logging
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from mucalc.conf import focus_setting
from mucalc.formula import MuCalcError, guard, parse, require_fragment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2


def dump_json(data):
    """确定性的 JSON 文本：键排序，非 ASCII 字符原样输出"""
    return json.dumps(data, ensure_ascii=False, sort_keys=True, indent=2)


def read_json_file(path):
    """读取 JSON 文件，失败时抛出退出码为 2 的 CommandError"""
    try:
        return json.loads(Path(path).read_text(encoding='utf-8'))
    except OSError as exc:
        raise CommandError(f'无法读取文件 {path}: {exc}', returncode=EXIT_INPUT) from exc
    except json.JSONDecodeError as exc:
        raise CommandError(f'{path} 不是合法的 JSON: {exc}', returncode=EXIT_INPUT) from exc


def write_json_file(path, data):
    write_text_file(path, dump_json(data) + '\n')


def write_text_file(path, text):
    try:
        Path(path).write_text(text, encoding='utf-8')
    except OSError as exc:
        raise CommandError(f'无法写入文件 {path}: {exc}', returncode=EXIT_INPUT) from exc


class FormulaCommand(BaseCommand):
    """
    处理公式参数的命令基类

    统一提供 --auto-guard 选项，并让 --version 输出 JSON 格式版本而不是 Django 版本。
    """

    def get_version(self):
        return f'schema {focus_setting("SCHEMA_VERSION")}'

    def add_arguments(self, parser):
        parser.add_argument(
            '--auto-guard',
            action='store_true',
            help='先对输入公式做 guard 变换',
        )

    def auto_guard(self, options):
        return options.get('auto_guard') or focus_setting('AUTO_GUARD')

    def read_formula(self, text, options, fragment=True):
        """
        解析一个公式参数

        Args:
            text: 公式文本
            options: 命令选项，--auto-guard 打开时先做 guard 变换
            fragment: 是否要求有守卫且交替自由

        Raises:
            CommandError: 语法或片段错误，退出码 2
        """
        try:
            formula = parse(text)
            if self.auto_guard(options):
                formula = guard(formula)
            if fragment:
                require_fragment([formula])
        except MuCalcError as exc:
            raise CommandError(f'公式 {text!r} 不合法: {exc}', returncode=EXIT_INPUT) from exc
        return formula

    def read_formulas(self, texts, options, fragment=True):
        return [self.read_formula(text, options, fragment) for text in texts]

    def emit(self, data):
        """在 stdout 输出带格式版本号的 JSON"""
        self.stdout.write(dump_json({'schema': focus_setting('SCHEMA_VERSION'), **data}))

    def summary(self, message, ok=True):
        style = self.style.SUCCESS if ok else self.style.WARNING
        self.stderr.write(style(message))

    def negative(self, message):
        """否定结论（INVALID、false、存在问题）以退出码 1 结束"""
        raise CommandError(message, returncode=EXIT_NEGATIVE)

    def input_error(self, message, exc):
        logger.exception(message)
        raise CommandError(f'{message}: {exc}', returncode=EXIT_INPUT) from exc
