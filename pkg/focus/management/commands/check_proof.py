"""
检查证明文件
用法: python manage.py check_proof proof.json [--allow-assumptions]
"""
import logging

from focus.cli import FormulaCommand, read_json_file
from focus.proofs import ProofFormatError, check_proof, is_progressive, is_thin, proof_from_json

logger = logging.getLogger(__name__)


class Command(FormulaCommand):
    help = '检查 JSON 格式的 Focus 证明，输出 OK 或违反的条件列表'

    def add_arguments(self, parser):
        parser.add_argument('proof', help='证明 JSON 文件')
        parser.add_argument(
            '--allow-assumptions',
            action='store_true',
            help='允许开放假设叶子（用于检查展开前缀）',
        )

    def handle(self, *args, **options):
        data = read_json_file(options['proof'])
        try:
            proof = proof_from_json(data)
        except ProofFormatError as exc:
            self.input_error(f'证明文件 {options["proof"]} 格式错误', exc)

        violations = check_proof(proof, allow_assumptions=options['allow_assumptions'])
        self.emit({
            'status': 'VIOLATIONS' if violations else 'OK',
            'violations': [v.to_json() for v in violations],
            'nodes': len(proof),
            'thin': is_thin(proof),
            'progressive': is_progressive(proof),
        })
        if violations:
            self.summary(f'发现 {len(violations)} 处违反', ok=False)
            self.negative('证明未通过检查')
        self.summary(f'OK: {len(proof)} 个节点')
